#include "svitorus/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "svitorus/rng.hpp"
#include "svitorus/verify.hpp"

namespace svt {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 6.283185307179586476925286766559;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void reject_unknown(const json& obj, const std::string& section,
                    const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail("section '" + section + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            fail("unknown key '" + it.key() + "' in section '" + section + "'");
        }
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        fail("bad value for '" + key + "': " + e.what());
    }
}

InitialConfig parse_initial(const json& obj, const std::string& section) {
    reject_unknown(obj, section,
                   {"kind", "k", "amplitude", "s_norm", "center", "width", "smoothing"});
    InitialConfig init;
    init.kind = get_or<std::string>(obj, "kind", init.kind);
    if (init.kind != "mode" && init.kind != "random-band" && init.kind != "bump") {
        fail("initial.kind must be mode | random-band | bump");
    }
    init.mode_k = get_or<int>(obj, "k", init.mode_k);
    init.amplitude = get_or<double>(obj, "amplitude", init.amplitude);
    init.s_norm = get_or<double>(obj, "s_norm", init.s_norm);
    init.center = get_or<double>(obj, "center", init.center);
    init.width = get_or<double>(obj, "width", init.width);
    init.smoothing = get_or<double>(obj, "smoothing", init.smoothing);
    if (init.smoothing <= 0.0) fail("initial.smoothing must be positive");
    return init;
}

json initial_to_json(const InitialConfig& init) {
    return json{{"kind", init.kind},       {"k", init.mode_k},     {"amplitude", init.amplitude},
                {"s_norm", init.s_norm},   {"center", init.center}, {"width", init.width},
                {"smoothing", init.smoothing}};
}

ScalarField sample_expression(const json& expr, const PeriodicGrid& g) {
    // Either a bare number (constant) or {"const": c, "terms": [{"amp": a,
    // "factors": [{"fn": "sin"|"cos", "axis": 0, "freq": 1, "phase": 0}]}]}.
    if (expr.is_number()) return ScalarField(g, expr.get<double>());
    reject_unknown(expr, "coefficient expression", {"const", "terms"});
    const double constant = get_or<double>(expr, "const", 0.0);
    struct Factor {
        bool is_sin;
        int axis;
        int freq;
        double phase;
    };
    struct Term {
        double amp;
        std::vector<Factor> factors;
    };
    std::vector<Term> terms;
    if (expr.contains("terms")) {
        for (const auto& t : expr.at("terms")) {
            reject_unknown(t, "coefficient term", {"amp", "factors"});
            Term term;
            term.amp = get_or<double>(t, "amp", 1.0);
            for (const auto& f : t.at("factors")) {
                reject_unknown(f, "coefficient factor", {"fn", "axis", "freq", "phase"});
                Factor factor;
                const std::string fn = get_or<std::string>(f, "fn", "sin");
                if (fn != "sin" && fn != "cos") fail("factor fn must be sin or cos");
                factor.is_sin = fn == "sin";
                factor.axis = get_or<int>(f, "axis", 0);
                if (factor.axis < 0 || factor.axis >= g.d) fail("factor axis out of range");
                factor.freq = get_or<int>(f, "freq", 1);
                factor.phase = get_or<double>(f, "phase", 0.0);
                term.factors.push_back(factor);
            }
            terms.push_back(std::move(term));
        }
    }
    return ScalarField::sample(g, [&](double x0, double x1) {
        double v = constant;
        for (const auto& term : terms) {
            double prod = term.amp;
            for (const auto& f : term.factors) {
                const double arg = kTwoPi * f.freq * (f.axis == 0 ? x0 : x1) + f.phase;
                prod *= f.is_sin ? std::sin(arg) : std::cos(arg);
            }
            v += prod;
        }
        return v;
    });
}

std::vector<std::vector<double>> parse_matrix_literal(const std::string& text) {
    json rows;
    try {
        rows = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("bad constant matrix literal: ") + e.what());
    }
    std::vector<std::vector<double>> out;
    for (const auto& row : rows) out.push_back(row.get<std::vector<double>>());
    return out;
}

}  // namespace

MatrixField matrix_from_spec(const nlohmann::json& spec, const PeriodicGrid& g, bool square) {
    if (spec.is_string()) {
        const std::string s = spec.get<std::string>();
        if (s == "identity") {
            if (!square) fail("'identity' is only valid for the a coefficient");
            return MatrixField::identity(g);
        }
        if (s == "zero") {
            if (square) fail("'zero' is only valid for the b coefficient");
            return MatrixField::constant(
                g, std::vector<std::vector<double>>(1, std::vector<double>(static_cast<std::size_t>(g.d), 0.0)));
        }
        if (s.rfind("ones:", 0) == 0) {
            const int rows = std::stoi(s.substr(5));
            if (rows < 1) fail("ones:<N> needs N >= 1");
            return MatrixField::constant(
                g, std::vector<std::vector<double>>(static_cast<std::size_t>(rows),
                                                    std::vector<double>(static_cast<std::size_t>(g.d), 1.0)));
        }
        if (s.rfind("constant:", 0) == 0) {
            return MatrixField::constant(g, parse_matrix_literal(s.substr(9)));
        }
        if (s.rfind("paper-2.5", 0) == 0) {
            if (!square) fail("paper-2.5 names the a coefficient; use b = ones:2");
            // Reuse the preset a-part: built through the combined preset.
            CoefficientSet pair = CoefficientSet::preset(s, g);
            return pair.a();
        }
        fail("unknown coefficient spec: " + s);
    }
    if (spec.is_object()) {
        reject_unknown(spec, "coefficient matrix", {"rows"});
        if (!spec.contains("rows")) fail("inline coefficient needs 'rows'");
        const auto& rows = spec.at("rows");
        const int r = static_cast<int>(rows.size());
        if (r < 1) fail("inline coefficient needs at least one row");
        const int c = static_cast<int>(rows.at(0).size());
        if (square && (r != g.d || c != g.d)) fail("a must be d x d");
        if (!square && c != g.d) fail("b must be N x d");
        MatrixField m(g, r, c);
        for (int i = 0; i < r; ++i) {
            const auto& row = rows.at(static_cast<std::size_t>(i));
            if (static_cast<int>(row.size()) != c) fail("ragged coefficient matrix");
            for (int j = 0; j < c; ++j) {
                m.entry(i, j) = sample_expression(row.at(static_cast<std::size_t>(j)), g);
            }
        }
        return m;
    }
    fail("coefficient spec must be a string or an object");
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.is_open()) fail("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line number for the diagnostic.
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i) {
            if (text[i] == '\n') ++line;
        }
        fail("config parse error at line " + std::to_string(line) + ": " + e.what());
    }
    return from_json(doc);
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
    reject_unknown(doc, "top level",
                   {"grid", "potential", "coefficients", "solver", "verify", "output"});
    ExperimentConfig cfg;

    if (doc.contains("grid")) {
        const auto& grid = doc.at("grid");
        reject_unknown(grid, "grid", {"d", "n"});
        cfg.solver.grid_d = get_or<int>(grid, "d", 1);
        cfg.solver.grid_n = get_or<int>(grid, "n", 64);
    }
    if (doc.contains("potential")) {
        const auto& pot = doc.at("potential");
        reject_unknown(pot, "potential", {"name"});
        cfg.potential = get_or<std::string>(pot, "name", cfg.potential);
    }
    if (doc.contains("coefficients")) {
        const auto& co = doc.at("coefficients");
        reject_unknown(co, "coefficients", {"preset", "a", "b"});
        cfg.coefficients.preset = get_or<std::string>(co, "preset", "");
        if (co.contains("a")) cfg.coefficients.a = co.at("a");
        if (co.contains("b")) cfg.coefficients.b = co.at("b");
        if (!cfg.coefficients.preset.empty() &&
            (!cfg.coefficients.a.is_null() || !cfg.coefficients.b.is_null())) {
            fail("coefficients: give either a preset or a/b specs, not both");
        }
        if (cfg.coefficients.preset.empty() &&
            (cfg.coefficients.a.is_null() || cfg.coefficients.b.is_null())) {
            fail("coefficients: need both a and b specs (or a preset)");
        }
    } else {
        cfg.coefficients.preset = "identity";
    }
    if (doc.contains("solver")) {
        const auto& so = doc.at("solver");
        reject_unknown(so, "solver",
                       {"lambda", "delta", "eps", "dt", "T", "paths", "seed", "scheme", "cg_tol",
                        "cg_max_iter", "initial"});
        cfg.solver.lambda = get_or<double>(so, "lambda", cfg.solver.lambda);
        cfg.solver.delta = get_or<double>(so, "delta", cfg.solver.delta);
        cfg.solver.eps = get_or<double>(so, "eps", cfg.solver.eps);
        cfg.solver.dt = get_or<double>(so, "dt", cfg.solver.dt);
        cfg.solver.horizon = get_or<double>(so, "T", cfg.solver.horizon);
        cfg.solver.paths = get_or<int>(so, "paths", cfg.solver.paths);
        cfg.solver.seed = get_or<std::uint64_t>(so, "seed", cfg.solver.seed);
        cfg.solver.scheme =
            scheme_from_string(get_or<std::string>(so, "scheme", scheme_to_string(cfg.solver.scheme)));
        cfg.solver.cg_tol = get_or<double>(so, "cg_tol", cfg.solver.cg_tol);
        cfg.solver.cg_max_iter = get_or<int>(so, "cg_max_iter", cfg.solver.cg_max_iter);
        if (so.contains("initial")) cfg.initial = parse_initial(so.at("initial"), "solver.initial");
    }
    if (doc.contains("verify")) {
        const auto& ve = doc.at("verify");
        reject_unknown(ve, "verify",
                       {"inequalities", "conditions", "beta_list", "t_list", "samples", "substeps",
                        "lambda_list", "delta_list", "eps_list", "svi_elements",
                        "contraction_perturbation"});
        cfg.verify.inequalities =
            get_or<std::vector<std::string>>(ve, "inequalities", cfg.verify.inequalities);
        cfg.verify.conditions = get_or<std::vector<std::string>>(ve, "conditions", cfg.verify.conditions);
        cfg.verify.beta_list = get_or<std::vector<double>>(ve, "beta_list", cfg.verify.beta_list);
        cfg.verify.t_list = get_or<std::vector<double>>(ve, "t_list", cfg.verify.t_list);
        cfg.verify.samples = get_or<int>(ve, "samples", cfg.verify.samples);
        cfg.verify.substeps = get_or<int>(ve, "substeps", cfg.verify.substeps);
        cfg.verify.lambda_list = get_or<std::vector<double>>(ve, "lambda_list", cfg.verify.lambda_list);
        cfg.verify.delta_list = get_or<std::vector<double>>(ve, "delta_list", cfg.verify.delta_list);
        cfg.verify.eps_list = get_or<std::vector<double>>(ve, "eps_list", cfg.verify.eps_list);
        cfg.verify.svi_elements = get_or<std::string>(ve, "svi_elements", cfg.verify.svi_elements);
        if (ve.contains("contraction_perturbation")) {
            cfg.verify.contraction_perturbation =
                parse_initial(ve.at("contraction_perturbation"), "verify.contraction_perturbation");
        }
    }
    if (doc.contains("output")) {
        const auto& out = doc.at("output");
        reject_unknown(out, "output",
                       {"dir", "stats_csv", "reports_json", "resolved_config", "snapshot_times",
                        "echo_config"});
        cfg.output.dir = get_or<std::string>(out, "dir", cfg.output.dir);
        cfg.output.stats_csv = get_or<std::string>(out, "stats_csv", cfg.output.stats_csv);
        cfg.output.reports_json = get_or<std::string>(out, "reports_json", cfg.output.reports_json);
        cfg.output.resolved_config =
            get_or<std::string>(out, "resolved_config", cfg.output.resolved_config);
        cfg.output.snapshot_times =
            get_or<std::vector<double>>(out, "snapshot_times", cfg.output.snapshot_times);
        cfg.output.echo_config = get_or<bool>(out, "echo_config", cfg.output.echo_config);
    }

    try {
        cfg.solver.validate();
        (void)cfg.make_potential_instance();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    json doc;
    doc["grid"] = {{"d", solver.grid_d}, {"n", solver.grid_n}};
    doc["potential"] = {{"name", potential}};
    json co;
    if (!coefficients.preset.empty()) {
        co["preset"] = coefficients.preset;
    } else {
        co["a"] = coefficients.a;
        co["b"] = coefficients.b;
    }
    doc["coefficients"] = co;
    doc["solver"] = {{"lambda", solver.lambda},
                     {"delta", solver.delta},
                     {"eps", solver.eps},
                     {"dt", solver.dt},
                     {"T", solver.horizon},
                     {"paths", solver.paths},
                     {"seed", solver.seed},
                     {"scheme", scheme_to_string(solver.scheme)},
                     {"cg_tol", solver.cg_tol},
                     {"cg_max_iter", solver.cg_max_iter},
                     {"initial", initial_to_json(initial)}};
    doc["verify"] = {{"inequalities", verify.inequalities},
                     {"conditions", verify.conditions},
                     {"beta_list", verify.beta_list},
                     {"t_list", verify.t_list},
                     {"samples", verify.samples},
                     {"substeps", verify.substeps},
                     {"lambda_list", verify.lambda_list},
                     {"delta_list", verify.delta_list},
                     {"eps_list", verify.eps_list},
                     {"svi_elements", verify.svi_elements},
                     {"contraction_perturbation", initial_to_json(verify.contraction_perturbation)}};
    doc["output"] = {{"dir", output.dir},
                     {"stats_csv", output.stats_csv},
                     {"reports_json", output.reports_json},
                     {"resolved_config", output.resolved_config},
                     {"snapshot_times", output.snapshot_times},
                     {"echo_config", output.echo_config}};
    return doc;
}

ConvexPotential ExperimentConfig::make_potential_instance() const { return make_potential(potential); }

std::shared_ptr<const CoefficientSet> ExperimentConfig::make_coefficients() const {
    const PeriodicGrid g = solver.make_grid();
    try {
        if (!coefficients.preset.empty()) {
            return std::make_shared<CoefficientSet>(CoefficientSet::preset(coefficients.preset, g));
        }
        MatrixField a = matrix_from_spec(coefficients.a, g, true);
        MatrixField b = matrix_from_spec(coefficients.b, g, false);
        // Sampled user data gets the looser checker tolerance.
        const bool inline_data = coefficients.a.is_object() || coefficients.b.is_object();
        return std::make_shared<CoefficientSet>(std::move(a), std::move(b),
                                                inline_data ? 1e-4 : 1e-8);
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

ScalarField ExperimentConfig::make_initial_field() const { return make_initial_field(initial); }

ScalarField ExperimentConfig::make_initial_field(const InitialConfig& init) const {
    const PeriodicGrid g = solver.make_grid();
    if (init.kind == "mode") {
        const int k = init.mode_k;
        const double amp = init.amplitude;
        return ScalarField::sample(g, [k, amp](double x, double) {
            return amp * std::sin(kTwoPi * k * x);
        });
    }
    if (init.kind == "random-band") {
        return random_band_limited_field(g, solver.seed ^ 0xABCDEF12345ULL, init.s_norm);
    }
    // Smoothed indicator bump around `center` with the given width.
    const double c = init.center, w = init.width, s = init.smoothing, amp = init.amplitude;
    return ScalarField::sample(g, [&](double x, double y) {
        auto dist = [](double u, double v) {
            double d = std::abs(u - v);
            return std::min(d, 1.0 - d);
        };
        const double r = g.d == 1 ? dist(x, c) : std::hypot(dist(x, c), dist(y, c));
        return amp * 0.5 * (1.0 + std::tanh((w / 2.0 - r) / s));
    });
}

}  // namespace svt
