#include "svitorus/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "svitorus/fft.hpp"

namespace svt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Scratch {
    SpecBuf axis_hat, comp_hat, r, z, p, Ap, x;
    std::vector<std::vector<double>> grad_phys;
    std::vector<std::vector<double>> flux_phys;
    SpecBuf drift_tmp, v_hat, w_hat;
};

Scratch& scratch() {
    thread_local Scratch s;
    return s;
}

double dot_re(const SpecBuf& a, const SpecBuf& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    }
    return acc;
}

}  // namespace

OperatorSet::OperatorSet(std::shared_ptr<const CoefficientSet> coeffs, CgOptions cg)
    : coeffs_(std::move(coeffs)), cg_(cg) {
    if (!(cg_.tol < 1e-8)) throw std::invalid_argument("OperatorSet: CG tolerance must be < 1e-8");
    if (cg_.max_iter < 1) throw std::invalid_argument("OperatorSet: max_iter must be positive");
    if (!(coeffs_->kappa() > 1e-10)) {
        throw std::invalid_argument("OperatorSet: ellipticity check failed (kappa <= 1e-10)");
    }
    const PeriodicGrid& g = grid();
    double tr = 0.0;
    for (int i = 0; i < g.d; ++i) tr += integral(coeffs_->gram_a().entry(i, i));
    cbar_ = tr / g.d;

    laplace_symbol_.resize(g.size());
    const int n = g.n;
    if (g.d == 1) {
        for (int k = 0; k < n; ++k) {
            const double w = kTwoPi * wavenumber(k, n);
            laplace_symbol_[static_cast<std::size_t>(k)] = w * w;
        }
    } else {
        for (int k0 = 0; k0 < n; ++k0) {
            const double w0 = kTwoPi * wavenumber(k0, n);
            for (int k1 = 0; k1 < n; ++k1) {
                const double w1 = kTwoPi * wavenumber(k1, n);
                laplace_symbol_[static_cast<std::size_t>(k0) * n + k1] = w0 * w0 + w1 * w1;
            }
        }
    }
}

void OperatorSet::to_spec(const ScalarField& u, SpecBuf& out) const { to_spectrum(u, out); }

void OperatorSet::from_spec(const SpecBuf& in, ScalarField& out) const {
    from_spectrum(grid(), in, out);
}

void OperatorSet::grad_spec(const SpecBuf& in, std::vector<std::vector<double>>& comps) const {
    const PeriodicGrid& g = grid();
    const int n = g.n;
    Scratch& s = scratch();
    comps.resize(static_cast<std::size_t>(g.d));
    s.axis_hat.resize(g.size());
    for (int axis = 0; axis < g.d; ++axis) {
        if (g.d == 1) {
            for (int k = 0; k < n; ++k) {
                s.axis_hat[static_cast<std::size_t>(k)] =
                    std::complex<double>(0.0, kTwoPi * wavenumber(k, n)) * in[static_cast<std::size_t>(k)];
            }
            fft::inverse(s.axis_hat.data(), n);
        } else {
            for (int k0 = 0; k0 < n; ++k0) {
                const double w0 = wavenumber(k0, n);
                for (int k1 = 0; k1 < n; ++k1) {
                    const double w = axis == 0 ? w0 : wavenumber(k1, n);
                    s.axis_hat[static_cast<std::size_t>(k0) * n + k1] =
                        std::complex<double>(0.0, kTwoPi * w) * in[static_cast<std::size_t>(k0) * n + k1];
                }
            }
            fft::inverse2d(s.axis_hat.data(), n);
        }
        auto& c = comps[static_cast<std::size_t>(axis)];
        c.resize(g.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = s.axis_hat[i].real();
    }
}

void OperatorSet::div_gram_grad_spec(const SpecBuf& in, const MatrixField& gram,
                                     SpecBuf& out) const {
    const PeriodicGrid& g = grid();
    const int n = g.n;
    Scratch& s = scratch();
    grad_spec(in, s.grad_phys);

    out.assign(g.size(), {0.0, 0.0});
    s.comp_hat.resize(g.size());
    for (int j = 0; j < g.d; ++j) {
        // flux_j = sum_l gram_jl * grad_l, pointwise.
        for (std::size_t p = 0; p < g.size(); ++p) {
            double v = 0.0;
            for (int l = 0; l < g.d; ++l) {
                v += gram.entry(j, l)[p] * s.grad_phys[static_cast<std::size_t>(l)][p];
            }
            s.comp_hat[p] = v;
        }
        if (g.d == 1) {
            fft::forward(s.comp_hat.data(), n);
        } else {
            fft::forward2d(s.comp_hat.data(), n);
        }
        const double scale = 1.0 / static_cast<double>(g.size());
        if (g.d == 1) {
            for (int k = 0; k < n; ++k) {
                out[static_cast<std::size_t>(k)] +=
                    std::complex<double>(0.0, kTwoPi * wavenumber(k, n)) * s.comp_hat[static_cast<std::size_t>(k)] * scale;
            }
        } else {
            for (int k0 = 0; k0 < n; ++k0) {
                const double w0 = wavenumber(k0, n);
                for (int k1 = 0; k1 < n; ++k1) {
                    const double w = j == 0 ? w0 : wavenumber(k1, n);
                    out[static_cast<std::size_t>(k0) * n + k1] +=
                        std::complex<double>(0.0, kTwoPi * w) * s.comp_hat[static_cast<std::size_t>(k0) * n + k1] * scale;
                }
            }
        }
    }
}

void OperatorSet::La_spec(const SpecBuf& in, SpecBuf& out) const {
    div_gram_grad_spec(in, coeffs_->gram_a(), out);
}

void OperatorSet::Lb_spec(const SpecBuf& in, SpecBuf& out) const {
    div_gram_grad_spec(in, coeffs_->gram_b(), out);
}

ScalarField OperatorSet::apply_La(const ScalarField& u) const {
    if (!(u.grid() == grid())) throw std::invalid_argument("apply_La: grid mismatch");
    SpecBuf in, out;
    to_spec(u, in);
    La_spec(in, out);
    ScalarField f;
    from_spec(out, f);
    return f;
}

ScalarField OperatorSet::apply_Lb(const ScalarField& u) const {
    if (!(u.grid() == grid())) throw std::invalid_argument("apply_Lb: grid mismatch");
    SpecBuf in, out;
    to_spec(u, in);
    Lb_spec(in, out);
    ScalarField f;
    from_spec(out, f);
    return f;
}

void OperatorSet::solve_Ja_spec(const SpecBuf& rhs, double delta, SpecBuf& out, const SpecBuf* guess,
                                CgStats* stats) const {
    const PeriodicGrid& g = grid();
    const std::size_t size = g.size();
    Scratch& s = scratch();

    // System (1 - delta L^a) x = rhs, SPD for delta > 0. Preconditioner is the
    // flat Helmholtz inverse 1/(1 + delta cbar |2 pi k|^2).
    auto apply_system = [&](const SpecBuf& x, SpecBuf& ax) {
        La_spec(x, ax);
        for (std::size_t i = 0; i < size; ++i) ax[i] = x[i] - delta * ax[i];
    };

    out.resize(size);
    if (guess && guess->size() == size) {
        out = *guess;
    } else {
        for (std::size_t i = 0; i < size; ++i) out[i] = rhs[i] / (1.0 + delta * cbar_ * laplace_symbol_[i]);
    }
    out[0] = rhs[0];  // constants are untouched by L^a; mean preserved exactly

    const double rhs_norm = std::sqrt(dot_re(rhs, rhs));
    if (rhs_norm == 0.0) {
        std::fill(out.begin(), out.end(), std::complex<double>(0.0, 0.0));
        if (stats) *stats = {0, 0.0};
        return;
    }

    s.r.resize(size); s.z.resize(size); s.p.resize(size); s.Ap.resize(size);
    apply_system(out, s.Ap);
    for (std::size_t i = 0; i < size; ++i) s.r[i] = rhs[i] - s.Ap[i];
    s.r[0] = 0.0;

    auto precondition = [&](const SpecBuf& r, SpecBuf& z) {
        for (std::size_t i = 0; i < size; ++i) z[i] = r[i] / (1.0 + delta * cbar_ * laplace_symbol_[i]);
    };

    precondition(s.r, s.z);
    s.p = s.z;
    double rz = dot_re(s.r, s.z);
    double res = std::sqrt(dot_re(s.r, s.r));
    int it = 0;
    while (res > cg_.tol * rhs_norm && it < cg_.max_iter) {
        apply_system(s.p, s.Ap);
        const double pap = dot_re(s.p, s.Ap);
        if (!(pap > 0.0)) break;  // numerically singular direction
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < size; ++i) {
            out[i] += alpha * s.p[i];
            s.r[i] -= alpha * s.Ap[i];
        }
        s.r[0] = 0.0;
        precondition(s.r, s.z);
        const double rz_new = dot_re(s.r, s.z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < size; ++i) s.p[i] = s.z[i] + beta * s.p[i];
        res = std::sqrt(dot_re(s.r, s.r));
        ++it;
    }
    if (stats) *stats = {it, res / rhs_norm};
    if (res > cg_.tol * rhs_norm) {
        throw std::runtime_error("resolvent CG did not converge: relative residual " +
                                 std::to_string(res / rhs_norm) + " after " + std::to_string(it) +
                                 " iterations");
    }
}

ScalarField OperatorSet::resolvent_Ja(const ScalarField& u, double delta,
                                      const ScalarField* initial_guess, CgStats* stats) const {
    if (!(delta > 0.0)) throw std::invalid_argument("resolvent_Ja: delta must be positive");
    if (!(u.grid() == grid())) throw std::invalid_argument("resolvent_Ja: grid mismatch");
    SpecBuf rhs, out, guess;
    to_spec(u, rhs);
    const SpecBuf* gp = nullptr;
    if (initial_guess) {
        to_spec(*initial_guess, guess);
        gp = &guess;
    }
    solve_Ja_spec(rhs, delta, out, gp, stats);
    ScalarField f;
    from_spec(out, f);
    return f;
}

ScalarField OperatorSet::resolvent_Gbeta(const ScalarField& u, double beta,
                                         const ScalarField* initial_guess, CgStats* stats) const {
    if (!(beta > 0.0)) throw std::invalid_argument("resolvent_Gbeta: beta must be positive");
    ScalarField v = resolvent_Ja(u, 1.0 / beta, initial_guess, stats);
    v *= 1.0 / beta;
    return v;
}

ScalarField OperatorSet::resolvent_J0(const ScalarField& u, double delta, double K,
                                      const ScalarField* initial_guess, CgStats* stats) const {
    if (!(delta > 0.0)) throw std::invalid_argument("resolvent_J0: delta must be positive");
    if (K > 0.0) throw std::invalid_argument("resolvent_J0: K must be <= 0");
    // (1 - delta (L + 2K))^{-1} = (1/(1-2K delta)) (1 - delta' L)^{-1},
    // delta' = delta / (1 - 2K delta).
    const double shift = 1.0 - 2.0 * K * delta;
    ScalarField v = resolvent_Ja(u, delta / shift, initial_guess, stats);
    v *= 1.0 / shift;
    return v;
}

VectorField OperatorSet::apply_B(const ScalarField& u, double delta) const {
    if (delta < 0.0) throw std::invalid_argument("apply_B: delta must be >= 0");
    if (!(u.grid() == grid())) throw std::invalid_argument("apply_B: grid mismatch");
    const PeriodicGrid& g = grid();
    ScalarField v = delta > 0.0 ? resolvent_Ja(u, delta) : u;
    VectorField gv = gradient(v);
    const int N = coeffs_->noise_dim();
    VectorField out(g, N);
    for (int i = 0; i < N; ++i) {
        double* o = out.comp(i).data();
        for (int j = 0; j < g.d; ++j) {
            const double* bij = coeffs_->b().entry(i, j).data();
            const double* gj = gv.comp(j).data();
            for (std::size_t p = 0; p < g.size(); ++p) o[p] += bij[p] * gj[p];
        }
    }
    return out;
}

void OperatorSet::nonlinear_drift_spec(const SpecBuf& u_hat, const ConvexPotential& P,
                                       double lambda, SpecBuf& out_hat, double* psi_quad,
                                       double* psi_plain_quad, double* form_a_quad) const {
    const PeriodicGrid& g = grid();
    const int n = g.n;
    const std::size_t size = g.size();
    Scratch& s = scratch();

    grad_spec(u_hat, s.grad_phys);

    // w = a grad u pointwise, then z = phi^lambda(w) radially, then flux = a* z.
    s.flux_phys.resize(static_cast<std::size_t>(g.d));
    for (auto& f : s.flux_phys) f.assign(size, 0.0);
    KahanSum psi_acc, plain_acc, form_acc;
    const MatrixField& a = coeffs_->a();
    std::vector<double> w(static_cast<std::size_t>(g.d)), z(static_cast<std::size_t>(g.d));
    for (std::size_t p = 0; p < size; ++p) {
        double r2 = 0.0;
        for (int i = 0; i < g.d; ++i) {
            double wi = 0.0;
            for (int j = 0; j < g.d; ++j) {
                wi += a.entry(i, j)[p] * s.grad_phys[static_cast<std::size_t>(j)][p];
            }
            w[static_cast<std::size_t>(i)] = wi;
            r2 += wi * wi;
        }
        const double r = std::sqrt(r2);
        const double m = yosida_multiplier(P, r, lambda);
        if (psi_quad) psi_acc.add(moreau_eval_radial(P, r, lambda));
        if (psi_plain_quad) plain_acc.add(P.theta(r));
        if (form_a_quad) form_acc.add(r2);
        for (int i = 0; i < g.d; ++i) z[static_cast<std::size_t>(i)] = m * w[static_cast<std::size_t>(i)];
        // flux_j = sum_i a_ij z_i  (a-transpose applied to z)
        for (int j = 0; j < g.d; ++j) {
            double fj = 0.0;
            for (int i = 0; i < g.d; ++i) fj += a.entry(i, j)[p] * z[static_cast<std::size_t>(i)];
            s.flux_phys[static_cast<std::size_t>(j)][p] = fj;
        }
    }
    if (psi_quad) *psi_quad = psi_acc.sum * g.cell_measure();
    if (psi_plain_quad) *psi_plain_quad = plain_acc.sum * g.cell_measure();
    if (form_a_quad) *form_a_quad = form_acc.sum * g.cell_measure();

    // Dealiased divergence of the flux, accumulated into out_hat.
    out_hat.assign(size, {0.0, 0.0});
    s.comp_hat.resize(size);
    const double cutoff = static_cast<double>(n) / 3.0;
    const double scale = 1.0 / static_cast<double>(size);
    for (int j = 0; j < g.d; ++j) {
        for (std::size_t p = 0; p < size; ++p) s.comp_hat[p] = s.flux_phys[static_cast<std::size_t>(j)][p];
        if (g.d == 1) {
            fft::forward(s.comp_hat.data(), n);
            for (int k = 0; k < n; ++k) {
                const double wk = wavenumber(k, n);
                if (std::abs(wk) > cutoff) continue;
                out_hat[static_cast<std::size_t>(k)] +=
                    std::complex<double>(0.0, kTwoPi * wk) * s.comp_hat[static_cast<std::size_t>(k)] * scale;
            }
        } else {
            fft::forward2d(s.comp_hat.data(), n);
            for (int k0 = 0; k0 < n; ++k0) {
                const double w0 = wavenumber(k0, n);
                for (int k1 = 0; k1 < n; ++k1) {
                    const double w1 = wavenumber(k1, n);
                    if (std::abs(w0) > cutoff || std::abs(w1) > cutoff) continue;
                    const double wk = j == 0 ? w0 : w1;
                    out_hat[static_cast<std::size_t>(k0) * n + k1] +=
                        std::complex<double>(0.0, kTwoPi * wk) * s.comp_hat[static_cast<std::size_t>(k0) * n + k1] * scale;
                }
            }
        }
    }
}

ScalarField OperatorSet::apply_drift(const ScalarField& u, const ConvexPotential& P, double lambda,
                                     double delta, double eps) const {
    if (!(lambda > 0.0) || !(delta > 0.0)) {
        throw std::invalid_argument("apply_drift: lambda and delta must be positive");
    }
    if (eps < 0.0) throw std::invalid_argument("apply_drift: eps must be >= 0");
    if (!(u.grid() == grid())) throw std::invalid_argument("apply_drift: grid mismatch");

    SpecBuf u_hat, nl_hat, v_hat, w_hat, z_hat;
    to_spec(u, u_hat);
    nonlinear_drift_spec(u_hat, P, lambda, nl_hat, nullptr, nullptr, nullptr);
    if (eps > 0.0) {
        La_spec(u_hat, w_hat);
        for (std::size_t i = 0; i < nl_hat.size(); ++i) nl_hat[i] += eps * w_hat[i];
    }

    // 1/2 J_delta L^b J_delta u.
    solve_Ja_spec(u_hat, delta, v_hat, nullptr, nullptr);
    Lb_spec(v_hat, w_hat);
    solve_Ja_spec(w_hat, delta, z_hat, nullptr, nullptr);
    for (std::size_t i = 0; i < nl_hat.size(); ++i) nl_hat[i] += 0.5 * z_hat[i];

    ScalarField out;
    from_spec(nl_hat, out);
    return out;
}

}  // namespace svt
