#include "svitorus/cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <set>

#include "svitorus/io.hpp"
#include "svitorus/verify.hpp"

namespace svt {

namespace {

using nlohmann::json;

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& over) {
    if (over.seed) cfg.solver.seed = *over.seed;
    if (over.out_dir) cfg.output.dir = *over.out_dir;
}

void echo_config(const ExperimentConfig& cfg) {
    if (!cfg.output.echo_config) return;
    atomic_write_text(std::filesystem::path(cfg.output.dir) / cfg.output.resolved_config,
                      cfg.to_json().dump(2) + "\n");
}

ConditionReport run_condition(const std::string& name, const CoefficientSet& cs) {
    if (name == "E") return check_E(cs);
    if (name == "D") return check_D(cs);
    if (name == "R") return check_R(cs);
    if (name == "BE") return check_BE_sufficient(cs);
    if (name == "killing") return check_killing(cs);
    throw ConfigError("unknown condition '" + name + "' (valid: E, D, R, BE, killing)");
}

bool preflight_conditions(const ExperimentConfig& cfg, const CoefficientSet& cs, bool force) {
    bool ok = true;
    for (const char* name : {"E", "D", "R"}) {
        ConditionReport rep = run_condition(name, cs);
        if (!rep.pass) {
            std::cerr << (force ? "warning (forced): " : "error: ") << "condition (" << name
                      << ") fails, residual " << rep.residual << " at (" << rep.location[0] << ","
                      << rep.location[1] << ")\n";
            ok = false;
        }
    }
    return ok || force;
}

double mc_stderr(const std::vector<double>& samples) {
    const std::size_t m = samples.size();
    if (m < 2) return 0.0;
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(m - 1);
    return std::sqrt(std::max(0.0, var) / static_cast<double>(m));
}

}  // namespace

int cmd_check(ExperimentConfig cfg, const CliOverrides& over) {
    apply_overrides(cfg, over);
    auto coeffs = cfg.make_coefficients();

    json reports = json::array();
    bool all_requested_pass = true;
    std::set<std::string> requested(cfg.verify.conditions.begin(), cfg.verify.conditions.end());
    for (const char* name : {"E", "D", "R", "BE", "killing"}) {
        ConditionReport rep = run_condition(name, *coeffs);
        const bool required = requested.count(name) > 0;
        std::cout << render_report_line(rep) << (required ? "" : "  [informational]") << "\n";
        if (required && !rep.pass) all_requested_pass = false;
        json j = report_to_json(rep);
        j["required"] = required;
        reports.push_back(std::move(j));
    }
    atomic_write_text(std::filesystem::path(cfg.output.dir) / "conditions.json",
                      reports.dump(2) + "\n");
    echo_config(cfg);
    return all_requested_pass ? 0 : 1;
}

int cmd_simulate(ExperimentConfig cfg, const CliOverrides& over) {
    apply_overrides(cfg, over);
    const auto t0 = std::chrono::steady_clock::now();
    auto coeffs = cfg.make_coefficients();
    if (!preflight_conditions(cfg, *coeffs, over.force)) return 1;

    CgOptions cg{cfg.solver.cg_tol, cfg.solver.cg_max_iter};
    OperatorSet ops(coeffs, cg);
    ConvexPotential pot = cfg.make_potential_instance();
    ScalarField x = cfg.make_initial_field();

    const int M = cfg.solver.paths;
    const int steps = cfg.solver.steps();
    const std::size_t cols = static_cast<std::size_t>(steps) + 1;
    std::vector<std::vector<double>> norms, psis, forms, means;
    norms.reserve(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        SimulateOptions opts;
        if (m == 0) opts.snapshot_times = cfg.output.snapshot_times;
        Trajectory tr = simulate(x, cfg.solver, ops, pot, m, opts);
        if (m == 0) {
            int index = 0;
            for (const auto& [t, field] : tr.snapshots) {
                const std::string name = "snapshot_" + std::to_string(index++) + ".bin";
                write_snapshot(std::filesystem::path(cfg.output.dir) / name, field);
            }
        }
        norms.push_back(std::move(tr.norm_H2));
        psis.push_back(std::move(tr.psi_lambda));
        forms.push_back(std::move(tr.energy_A));
        means.push_back(std::move(tr.mean));
    }

    StatsTable table;
    table.t.resize(cols);
    table.e_norm_H2.resize(cols);
    table.e_psi_lambda.resize(cols);
    table.e_form_A.resize(cols);
    table.mean.resize(cols);
    table.se_norm_H2.resize(cols);
    table.se_psi_lambda.resize(cols);
    table.se_form_A.resize(cols);
    table.se_mean.resize(cols);
    std::vector<double> column(static_cast<std::size_t>(M));
    auto aggregate = [&](const std::vector<std::vector<double>>& data, std::size_t k,
                         double& mean_out, double& se_out) {
        KahanSum acc;
        for (int m = 0; m < M; ++m) {
            column[static_cast<std::size_t>(m)] = data[static_cast<std::size_t>(m)][k];
            acc.add(column[static_cast<std::size_t>(m)]);
        }
        mean_out = acc.sum / M;
        se_out = mc_stderr(column);
    };
    for (std::size_t k = 0; k < cols; ++k) {
        table.t[k] = static_cast<double>(k) * cfg.solver.dt;
        aggregate(norms, k, table.e_norm_H2[k], table.se_norm_H2[k]);
        aggregate(psis, k, table.e_psi_lambda[k], table.se_psi_lambda[k]);
        aggregate(forms, k, table.e_form_A[k], table.se_form_A[k]);
        aggregate(means, k, table.mean[k], table.se_mean[k]);
    }
    atomic_write_text(std::filesystem::path(cfg.output.dir) / cfg.output.stats_csv,
                      stats_to_csv(table));
    echo_config(cfg);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "simulate: " << M << " path(s), " << steps << " step(s); final E||X||^2 = "
              << table.e_norm_H2.back() << "; wall time " << wall << " s\n";
    return 0;
}

int cmd_verify(ExperimentConfig cfg, std::vector<std::string> names, const CliOverrides& over) {
    apply_overrides(cfg, over);
    if (names.empty()) names = cfg.verify.inequalities;
    const std::set<std::string> valid{"energy", "apriori", "contraction", "wdc",
                                      "gradient", "svi", "resolvent-contraction"};
    for (const auto& n : names) {
        if (!valid.count(n)) {
            std::cerr << "unknown inequality '" << n << "'; valid names:";
            for (const auto& v : valid) std::cerr << " " << v;
            std::cerr << "\n";
            return 2;
        }
    }
    if (names.empty()) {
        std::cerr << "no inequalities selected (config verify.inequalities is empty)\n";
        return 2;
    }

    auto coeffs = cfg.make_coefficients();
    if (!preflight_conditions(cfg, *coeffs, over.force)) return 1;
    CgOptions cg{cfg.solver.cg_tol, cfg.solver.cg_max_iter};
    OperatorSet ops(coeffs, cg);
    ConvexPotential pot = cfg.make_potential_instance();
    ScalarField x = cfg.make_initial_field();

    // Measured constants shared by the reports that need them.
    std::optional<double> k_hat, c_hat;
    auto measured_k = [&]() {
        if (!k_hat) {
            double k = 0.0;
            verify_gradient_estimate(ops, cfg.verify.samples, cfg.verify.t_list,
                                     cfg.verify.substeps, cfg.solver.seed + 101, &k);
            k_hat = k;
        }
        return *k_hat;
    };
    auto measured_c = [&]() {
        if (!c_hat) {
            double c = 0.0;
            estimate_wdc_constant(ops, cfg.verify.beta_list, cfg.verify.samples,
                                  cfg.solver.seed + 202, &c);
            c_hat = c;
        }
        return *c_hat;
    };

    json reports = json::array();
    bool all_pass = true;
    for (const auto& name : names) {
        VerifyReport rep;
        if (name == "energy") {
            rep = verify_energy_bound(x, cfg.solver, ops, pot);
        } else if (name == "apriori") {
            rep = verify_apriori_bound(x, cfg.solver, ops, pot, std::min(measured_k(), 0.0),
                                       std::min(measured_c(), 0.0));
        } else if (name == "contraction") {
            ScalarField y = x + cfg.make_initial_field(cfg.verify.contraction_perturbation);
            rep = verify_contraction(x, y, cfg.solver, ops, pot);
        } else if (name == "wdc") {
            double c = 0.0;
            rep = estimate_wdc_constant(ops, cfg.verify.beta_list, cfg.verify.samples,
                                        cfg.solver.seed + 202, &c);
            c_hat = c;
        } else if (name == "gradient") {
            double k = 0.0;
            rep = verify_gradient_estimate(ops, cfg.verify.samples, cfg.verify.t_list,
                                           cfg.verify.substeps, cfg.solver.seed + 101, &k);
            k_hat = k;
        } else if (name == "resolvent-contraction") {
            rep = verify_resolvent_potential_contraction(ops, pot, cfg.solver.delta,
                                                         measured_k(), 100,
                                                         cfg.solver.seed + 303);
        } else if (name == "svi") {
            SviElementKind kind = SviElementKind::self_test;
            if (cfg.verify.svi_elements == "zero") kind = SviElementKind::zero;
            else if (cfg.verify.svi_elements == "heat") kind = SviElementKind::heat_flow;
            else if (cfg.verify.svi_elements != "self") {
                throw ConfigError("verify.svi_elements must be self | zero | heat");
            }
            rep = verify_svi_mc(x, cfg.solver, ops, pot, kind);
        }
        std::cout << render_report_line(rep) << "\n";
        reports.push_back(report_to_json(rep));
        all_pass = all_pass && rep.pass;
    }
    atomic_write_text(std::filesystem::path(cfg.output.dir) / cfg.output.reports_json,
                      reports.dump(2) + "\n");
    echo_config(cfg);
    return all_pass ? 0 : 1;
}

int cmd_rate_study(ExperimentConfig cfg, const std::string& parameter, const CliOverrides& over) {
    apply_overrides(cfg, over);
    auto coeffs = cfg.make_coefficients();
    if (!preflight_conditions(cfg, *coeffs, over.force)) return 1;
    CgOptions cg{cfg.solver.cg_tol, cfg.solver.cg_max_iter};
    OperatorSet ops(coeffs, cg);
    ConvexPotential pot = cfg.make_potential_instance();
    ScalarField x = cfg.make_initial_field();

    RateStudyResult rs;
    if (parameter == "lambda") {
        rs = rate_study_lambda(x, cfg.solver, ops, pot, cfg.verify.lambda_list);
    } else if (parameter == "delta") {
        rs = rate_study_delta(x, cfg.solver, ops, pot, cfg.verify.delta_list);
    } else if (parameter == "eps") {
        rs = rate_study_eps(x, cfg.solver, ops, pot, cfg.verify.eps_list);
    } else {
        std::cerr << "unknown rate-study parameter '" << parameter
                  << "' (valid: lambda, delta, eps)\n";
        return 2;
    }
    std::cout << render_report_line(rs.report) << "\n";
    json doc = report_to_json(rs.report);
    doc["abscissa"] = rs.abscissa;
    doc["errors"] = rs.errors;
    doc["slope"] = rs.slope;
    atomic_write_text(std::filesystem::path(cfg.output.dir) / ("rate_" + parameter + ".json"),
                      doc.dump(2) + "\n");
    echo_config(cfg);
    return rs.report.pass ? 0 : 1;
}

}  // namespace svt
