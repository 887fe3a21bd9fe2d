#include "svitorus/simulator.hpp"

#include <cmath>
#include <iostream>

#include "svitorus/fft.hpp"
#include "svitorus/rng.hpp"

namespace svt {

namespace {

double spectral_norm2(const SpecBuf& x) {
    double acc = 0.0;
    for (const auto& z : x) acc += std::norm(z);
    return acc;
}

}  // namespace

Scheme scheme_from_string(const std::string& s) {
    if (s == "explicit") return Scheme::explicit_euler;
    if (s == "semi-implicit-eps") return Scheme::semi_implicit_eps;
    if (s == "semi-implicit-split") return Scheme::semi_implicit_split;
    throw std::invalid_argument("unknown scheme: " + s +
                                " (expected explicit | semi-implicit-eps | semi-implicit-split)");
}

std::string scheme_to_string(Scheme s) {
    switch (s) {
        case Scheme::explicit_euler: return "explicit";
        case Scheme::semi_implicit_eps: return "semi-implicit-eps";
        case Scheme::semi_implicit_split: return "semi-implicit-split";
    }
    return "?";
}

int SolverConfig::steps() const {
    if (horizon == 0.0) return 0;
    const double raw = horizon / dt;
    const int n = static_cast<int>(std::llround(raw));
    if (n < 0 || std::abs(n * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
        throw std::invalid_argument("SolverConfig: horizon must be an exact multiple of dt");
    }
    return n;
}

void SolverConfig::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("SolverConfig: lambda must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("SolverConfig: delta must be positive");
    if (eps < 0.0) throw std::invalid_argument("SolverConfig: eps must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be positive");
    if (horizon < 0.0) throw std::invalid_argument("SolverConfig: horizon must be >= 0");
    if (horizon > 0.0 && dt > horizon + 1e-15) {
        throw std::invalid_argument("SolverConfig: dt must not exceed the horizon");
    }
    if (paths < 1) throw std::invalid_argument("SolverConfig: paths must be >= 1");
    (void)steps();
    (void)PeriodicGrid(grid_d, grid_n);
}

NoisePath::NoisePath(std::uint64_t master_seed, int path_index, int channels, int steps, double dt)
    : steps_(steps), channels_(channels), dt_(dt) {
    if (channels < 0 || steps < 0) throw std::invalid_argument("NoisePath: bad shape");
    dw_.resize(static_cast<std::size_t>(steps) * static_cast<std::size_t>(channels));
    GaussianStream gauss(master_seed, static_cast<std::uint64_t>(path_index));
    const double sd = std::sqrt(dt);
    for (auto& w : dw_) w = sd * gauss.next();
}

Stepper::Stepper(const OperatorSet& ops, const ConvexPotential& P, const SolverConfig& cfg)
    : ops_(ops), pot_(P), cfg_(cfg) {
    cfg_.validate();
    split_c_ = (P.yosida_lipschitz(cfg_.lambda) + cfg_.eps) * ops_.coeffs().gram_max_eig();
    if (cfg_.split_c_override > 0.0) {
        if (cfg_.split_c_override < split_c_) {
            throw std::invalid_argument("split_c_override below the convex-splitting bound");
        }
        split_c_ = cfg_.split_c_override;
    }
}

void Stepper::set_state(const ScalarField& x) {
    if (!(x.grid() == ops_.grid())) throw std::invalid_argument("Stepper: grid mismatch");
    if (!x.all_finite()) throw std::invalid_argument("Stepper: non-finite initial state");
    state_ = x;
    ops_.to_spec(state_, x_hat_);
    guard_floor_ = std::max(spectral_norm2(x_hat_), 1e-16);
    have_warm_ = false;
}

void Stepper::refresh_state_from_hat() { ops_.from_spec(x_hat_, state_); }

Stepper::Stats Stepper::eval_stats() const {
    Stats st;
    st.norm_H2 = spectral_norm2(x_hat_);
    st.mean = x_hat_.empty() ? 0.0 : x_hat_[0].real();
    SpecBuf discard;
    ops_.nonlinear_drift_spec(x_hat_, pot_, cfg_.lambda, discard, &st.psi_lambda, &st.psi_plain,
                              &st.form_A);
    return st;
}

ScalarField Stepper::current_drift(double* psi_lambda) const {
    SpecBuf nl;
    ops_.nonlinear_drift_spec(x_hat_, pot_, cfg_.lambda, nl, psi_lambda, nullptr, nullptr);
    if (cfg_.eps > 0.0) {
        SpecBuf la;
        ops_.La_spec(x_hat_, la);
        for (std::size_t i = 0; i < nl.size(); ++i) nl[i] += cfg_.eps * la[i];
    }
    ScalarField out;
    ops_.from_spec(nl, out);
    return out;
}

Stepper::Stats Stepper::advance(std::span<const double> dW, int step_index) {
    const PeriodicGrid& g = ops_.grid();
    const std::size_t size = g.size();
    const int n = g.n;
    const int channels = ops_.coeffs().noise_dim();
    if (static_cast<int>(dW.size()) != channels) {
        throw std::invalid_argument("Stepper: noise increment has wrong channel count");
    }

    Stats st;
    st.norm_H2 = spectral_norm2(x_hat_);
    st.mean = x_hat_[0].real();
    ops_.nonlinear_drift_spec(x_hat_, pot_, cfg_.lambda, nl_hat_, &st.psi_lambda, &st.psi_plain,
                              &st.form_A);

    // eps L^a X is explicit except in the semi-implicit-eps scheme.
    if (cfg_.eps > 0.0 && cfg_.scheme != Scheme::semi_implicit_eps) {
        ops_.La_spec(x_hat_, tmp_hat_);
        for (std::size_t i = 0; i < size; ++i) nl_hat_[i] += cfg_.eps * tmp_hat_[i];
    }

    // Stratonovich correction 1/2 J L^b J X, with warm-started resolvents.
    ops_.solve_Ja_spec(x_hat_, cfg_.delta, v_hat_, have_warm_ ? &v_hat_ : nullptr, nullptr);
    ops_.Lb_spec(v_hat_, tmp_hat_);
    ops_.solve_Ja_spec(tmp_hat_, cfg_.delta, z_hat_, have_warm_ ? &z_hat_ : nullptr, nullptr);
    for (std::size_t i = 0; i < size; ++i) nl_hat_[i] += 0.5 * z_hat_[i];
    have_warm_ = true;

    // Noise field sum_i <b_i, grad J X> dW^i, assembled pointwise.
    ops_.grad_spec(v_hat_, grad_v_);
    noise_phys_.assign(size, 0.0);
    const auto& b = ops_.coeffs().b();
    for (int i = 0; i < channels; ++i) {
        const double w = dW[static_cast<std::size_t>(i)];
        if (w == 0.0) continue;
        for (int j = 0; j < g.d; ++j) {
            const double* bij = b.entry(i, j).data();
            const double* gj = grad_v_[static_cast<std::size_t>(j)].data();
            for (std::size_t p = 0; p < size; ++p) noise_phys_[p] += w * bij[p] * gj[p];
        }
    }
    noise_hat_.resize(size);
    for (std::size_t p = 0; p < size; ++p) noise_hat_[p] = noise_phys_[p];
    if (g.d == 1) {
        fft::forward(noise_hat_.data(), n);
    } else {
        fft::forward2d(noise_hat_.data(), n);
    }
    const double scale = 1.0 / static_cast<double>(size);
    for (auto& z : noise_hat_) z *= scale;

    const double dt = cfg_.dt;
    switch (cfg_.scheme) {
        case Scheme::explicit_euler:
            for (std::size_t i = 0; i < size; ++i) {
                x_hat_[i] += dt * nl_hat_[i] + noise_hat_[i];
            }
            break;
        case Scheme::semi_implicit_eps: {
            for (std::size_t i = 0; i < size; ++i) {
                tmp_hat_[i] = x_hat_[i] + dt * nl_hat_[i] + noise_hat_[i];
            }
            ops_.solve_Ja_spec(tmp_hat_, dt * cfg_.eps, x_hat_, &x_hat_, nullptr);
            break;
        }
        case Scheme::semi_implicit_split: {
            const auto& sym = ops_.laplace_symbol();
            for (std::size_t i = 0; i < size; ++i) {
                const double cs = dt * split_c_ * sym[i];
                x_hat_[i] = (x_hat_[i] * (1.0 + cs) + dt * nl_hat_[i] + noise_hat_[i]) / (1.0 + cs);
            }
            break;
        }
    }

    const double norm_after = spectral_norm2(x_hat_);
    if (norm_after > 1e6 * guard_floor_) {
        throw BlowupError(step_index, std::sqrt(norm_after / guard_floor_));
    }
    refresh_state_from_hat();
    return st;
}

ScalarField step(const ScalarField& X, std::span<const double> dW, const SolverConfig& cfg,
                 const OperatorSet& ops, const ConvexPotential& P) {
    Stepper st(ops, P, cfg);
    st.set_state(X);
    st.advance(dW, 0);
    return st.state();
}

double explicit_stability_bound(const SolverConfig& cfg, const OperatorSet& ops,
                                const ConvexPotential& P) {
    const double h = 1.0 / cfg.grid_n;
    const double sup_a2 = ops.coeffs().gram_max_eig();
    return h * h / (4.0 * sup_a2 * (P.yosida_lipschitz(cfg.lambda) + cfg.eps));
}

namespace {

struct SnapshotPlan {
    std::vector<std::pair<int, double>> at;  // (state index, requested time)
};

SnapshotPlan plan_snapshots(const SolverConfig& cfg, const SimulateOptions& opts) {
    SnapshotPlan plan;
    const int steps = cfg.steps();
    for (double t : opts.snapshot_times) {
        const int idx = static_cast<int>(std::llround(t / cfg.dt));
        if (idx < 0 || idx > steps || std::abs(idx * cfg.dt - t) > 1e-9 * std::max(1.0, cfg.horizon)) {
            throw std::invalid_argument("snapshot time " + std::to_string(t) +
                                        " is not on the step grid");
        }
        plan.at.emplace_back(idx, t);
    }
    return plan;
}

void record(Trajectory& tr, double t, const Stepper::Stats& st) {
    tr.times.push_back(t);
    tr.norm_H2.push_back(st.norm_H2);
    tr.psi_lambda.push_back(st.psi_lambda);
    tr.psi_plain.push_back(st.psi_plain);
    tr.energy_A.push_back(st.form_A);
    tr.mean.push_back(st.mean);
}

}  // namespace

Trajectory simulate(const ScalarField& x, const SolverConfig& cfg, const OperatorSet& ops,
                    const ConvexPotential& P, int path_index, const SimulateOptions& opts) {
    cfg.validate();
    if (cfg.scheme == Scheme::explicit_euler) {
        const double bound = explicit_stability_bound(cfg, ops, P);
        if (cfg.dt > bound) {
            std::cerr << "warning: explicit scheme dt " << cfg.dt
                      << " exceeds the stability bound " << bound << "\n";
        }
    }
    const int steps = cfg.steps();
    Stepper st(ops, P, cfg);
    st.set_state(x);
    NoisePath noise(cfg.seed, path_index, ops.coeffs().noise_dim(), steps, cfg.dt);
    SnapshotPlan plan = plan_snapshots(cfg, opts);

    Trajectory tr;
    tr.initial_state = x;
    for (const auto& [idx, t] : plan.at) {
        if (idx == 0) tr.snapshots.emplace_back(t, x);
    }
    if (opts.record_states) tr.states.push_back(x);

    for (int s = 0; s < steps; ++s) {
        Stepper::Stats stats;
        try {
            stats = st.advance(noise.increments(s), s);
        } catch (const BlowupError&) {
            throw;
        }
        record(tr, s * cfg.dt, stats);
        for (const auto& [idx, t] : plan.at) {
            if (idx == s + 1) tr.snapshots.emplace_back(t, st.state());
        }
        if (opts.record_states) tr.states.push_back(st.state());
    }
    record(tr, steps * cfg.dt, st.eval_stats());
    tr.final_state = st.state();
    return tr;
}

std::pair<Trajectory, Trajectory> simulate_pair(const ScalarField& x, const ScalarField& y,
                                                const SolverConfig& cfg, const OperatorSet& ops,
                                                const ConvexPotential& P, int path_index,
                                                std::vector<double>* diff_H2,
                                                const SimulateOptions& opts) {
    cfg.validate();
    if (!(x.grid() == y.grid())) throw std::invalid_argument("simulate_pair: grid mismatch");
    const int steps = cfg.steps();
    Stepper sx(ops, P, cfg), sy(ops, P, cfg);
    sx.set_state(x);
    sy.set_state(y);
    NoisePath noise(cfg.seed, path_index, ops.coeffs().noise_dim(), steps, cfg.dt);

    Trajectory trx, trY;
    trx.initial_state = x;
    trY.initial_state = y;
    auto push_diff = [&]() {
        if (!diff_H2) return;
        const SpecBuf& a = sx.state_spectrum();
        const SpecBuf& b = sy.state_spectrum();
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
        diff_H2->push_back(acc);
    };
    if (opts.record_states) {
        trx.states.push_back(x);
        trY.states.push_back(y);
    }
    push_diff();
    for (int s = 0; s < steps; ++s) {
        record(trx, s * cfg.dt, sx.advance(noise.increments(s), s));
        record(trY, s * cfg.dt, sy.advance(noise.increments(s), s));
        push_diff();
        if (opts.record_states) {
            trx.states.push_back(sx.state());
            trY.states.push_back(sy.state());
        }
    }
    record(trx, steps * cfg.dt, sx.eval_stats());
    record(trY, steps * cfg.dt, sy.eval_stats());
    trx.final_state = sx.state();
    trY.final_state = sy.state();
    return {std::move(trx), std::move(trY)};
}

}  // namespace svt
