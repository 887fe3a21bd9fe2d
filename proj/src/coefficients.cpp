#include "svitorus/coefficients.hpp"

#include <cmath>
#include <stdexcept>

namespace svt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

MatrixField derivative_of(const MatrixField& m, int axis) {
    MatrixField out(m.grid(), m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            out.entry(i, j) = gradient(m.entry(i, j)).comp(axis);
        }
    }
    return out;
}

MatrixField gram_of(const MatrixField& m) {
    // (m* m)_ij = sum_q m_qi m_qj, pointwise.
    const int d = m.cols();
    MatrixField out(m.grid(), d, d);
    const std::size_t size = m.grid().size();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double* o = out.entry(i, j).data();
            for (int q = 0; q < m.rows(); ++q) {
                const double* qi = m.entry(q, i).data();
                const double* qj = m.entry(q, j).data();
                for (std::size_t p = 0; p < size; ++p) o[p] += qi[p] * qj[p];
            }
        }
    }
    return out;
}

std::array<int, 2> unflatten(const PeriodicGrid& g, std::size_t idx) {
    if (g.d == 1) return {static_cast<int>(idx), 0};
    return {static_cast<int>(idx / static_cast<std::size_t>(g.n)),
            static_cast<int>(idx % static_cast<std::size_t>(g.n))};
}

// Eigenvalue range of the symmetric 2x2 (or 1x1) Gram matrix at one point.
void gram_eig_range(const MatrixField& gram, std::size_t p, double& lo, double& hi) {
    if (gram.rows() == 1) {
        lo = hi = gram.entry(0, 0)[p];
        return;
    }
    const double a = gram.entry(0, 0)[p];
    const double b = gram.entry(0, 1)[p];
    const double c = gram.entry(1, 1)[p];
    const double mean = 0.5 * (a + c);
    const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    lo = mean - disc;
    hi = mean + disc;
}

}  // namespace

CoefficientSet::CoefficientSet(MatrixField a, MatrixField b, double tolerance)
    : grid_(a.grid()), a_(std::move(a)), b_(std::move(b)), tolerance_(tolerance) {
    if (a_.rows() != grid_.d || a_.cols() != grid_.d) {
        throw std::invalid_argument("CoefficientSet: a must be d x d");
    }
    if (b_.cols() != grid_.d) throw std::invalid_argument("CoefficientSet: b must be N x d");
    if (!(b_.grid() == grid_)) throw std::invalid_argument("CoefficientSet: a and b grids differ");
    if (!a_.all_finite() || !b_.all_finite()) {
        throw std::invalid_argument("CoefficientSet: non-finite coefficient entries");
    }
    gram_a_ = gram_of(a_);
    gram_b_ = gram_of(b_);
    for (int k = 0; k < grid_.d; ++k) {
        da_.push_back(derivative_of(a_, k));
        db_.push_back(derivative_of(b_, k));
    }
    double lo_min = std::numeric_limits<double>::infinity();
    double hi_max = 0.0;
    for (std::size_t p = 0; p < grid_.size(); ++p) {
        double lo, hi;
        gram_eig_range(gram_a_, p, lo, hi);
        lo_min = std::min(lo_min, lo);
        hi_max = std::max(hi_max, hi);
    }
    kappa_ = lo_min;
    gram_max_eig_ = hi_max;
    for (std::size_t p = 0; p < grid_.size(); ++p) {
        double lo, hi;
        gram_eig_range(gram_b_, p, lo, hi);
        gram_b_max_eig_ = std::max(gram_b_max_eig_, hi);
    }
    for (int i = 0; i < b_.rows(); ++i) {
        for (std::size_t p = 0; p < grid_.size(); ++p) {
            double sq = 0.0;
            for (int j = 0; j < b_.cols(); ++j) {
                const double v = b_.entry(i, j)[p];
                sq += v * v;
            }
            b_sup_ = std::max(b_sup_, std::sqrt(sq));
        }
    }
}

CoefficientSet CoefficientSet::preset(const std::string& name, const PeriodicGrid& g) {
    if (name == "identity") {
        MatrixField b = MatrixField::constant(g, std::vector<std::vector<double>>(
                                                     static_cast<std::size_t>(g.d),
                                                     std::vector<double>(static_cast<std::size_t>(g.d), 1.0)));
        return CoefficientSet(MatrixField::identity(g), b);
    }
    if (name == "killing") {
        // Flat metric; on the torus the Killing fields are the constant ones.
        std::vector<std::vector<double>> rows;
        if (g.d == 1) {
            rows = {{1.0}, {-0.5}};
        } else {
            rows = {{1.0, 0.5}, {-0.25, 1.0}};
        }
        return CoefficientSet(MatrixField::identity(g), MatrixField::constant(g, rows));
    }
    if (name.rfind("paper-2.5", 0) == 0) {
        if (g.d != 2) throw std::invalid_argument("paper-2.5 preset needs d = 2");
        double c1 = 0.25, c2 = 0.2;
        const std::string tail = name.substr(std::string("paper-2.5").size());
        bool perturbed = false;
        std::string params = tail;
        if (tail.rfind("-perturbed", 0) == 0) {
            perturbed = true;
            params = tail.substr(std::string("-perturbed").size());
        }
        if (!params.empty()) {
            if (params.front() != ':') throw std::invalid_argument("bad preset name: " + name);
            const auto comma = params.find(',');
            if (comma == std::string::npos) throw std::invalid_argument("bad preset name: " + name);
            c1 = std::stod(params.substr(1, comma - 1));
            c2 = std::stod(params.substr(comma + 1));
        }
        if (std::abs(c1) >= 1.0 || std::abs(c2) >= 1.0) {
            throw std::invalid_argument("paper-2.5 preset needs |c| < 1 for positivity");
        }
        MatrixField a(g, 2, 2);
        a.entry(0, 0) = ScalarField::sample(g, [c1](double t, double s) {
            return 1.0 + c1 * std::sin(kTwoPi * (t - s));
        });
        a.entry(1, 1) = ScalarField::sample(g, [c2](double t, double s) {
            return 1.0 + c2 * std::cos(kTwoPi * (t - s));
        });
        MatrixField b = MatrixField::constant(g, {{1.0, 1.0}, {1.0, 1.0}});
        if (perturbed) {
            // Still divergence-free, but breaks the symmetry condition (R).
            b.entry(0, 1) = ScalarField::sample(g, [](double t, double) {
                return 1.0 + 0.5 * std::sin(kTwoPi * t);
            });
        }
        return CoefficientSet(std::move(a), std::move(b));
    }
    if (name.rfind("d1-transport:", 0) == 0) {
        if (g.d != 1) throw std::invalid_argument("d1-transport preset needs d = 1");
        const double beta0 = std::stod(name.substr(std::string("d1-transport:").size()));
        MatrixField b = MatrixField::constant(g, {{beta0}});
        return CoefficientSet(MatrixField::identity(g), std::move(b));
    }
    throw std::invalid_argument("unknown coefficient preset: " + name);
}

double CoefficientSet::form_A(const ScalarField& u, const ScalarField& v) const {
    return dirichlet_form(u, v, a_);
}

double CoefficientSet::form_B(const ScalarField& u, const ScalarField& v) const {
    return dirichlet_form(u, v, b_);
}

ConditionReport check_E(const CoefficientSet& c) {
    ConditionReport rep;
    rep.condition = "E";
    double kappa = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t p = 0; p < c.grid().size(); ++p) {
        double lo, hi;
        gram_eig_range(c.gram_a(), p, lo, hi);
        if (lo < kappa) {
            kappa = lo;
            arg = p;
        }
    }
    rep.kappa = kappa;
    rep.residual = -kappa;
    rep.tolerance = -1e-10;
    rep.location = unflatten(c.grid(), arg);
    rep.finalize();
    return rep;
}

ConditionReport check_D(const CoefficientSet& c) {
    ConditionReport rep;
    rep.condition = "D";
    rep.tolerance = c.tolerance();
    double worst = 0.0;
    std::size_t arg = 0;
    for (int i = 0; i < c.noise_dim(); ++i) {
        ScalarField div_bi = divergence(c.b().row(i));
        for (std::size_t p = 0; p < div_bi.size(); ++p) {
            const double r = std::abs(div_bi[p]);
            if (r > worst) {
                worst = r;
                arg = p;
            }
        }
    }
    rep.residual = worst;
    rep.location = unflatten(c.grid(), arg);
    rep.finalize();
    return rep;
}

ConditionReport check_R(const CoefficientSet& c) {
    ConditionReport rep;
    rep.condition = "R";
    rep.tolerance = c.tolerance();
    const int d = c.dim();
    const int N = c.noise_dim();
    const std::size_t size = c.grid().size();
    double worst = 0.0;
    std::size_t arg = 0;
    for (int i = 0; i < N; ++i) {
        for (int l = 0; l < d; ++l) {
            for (int j = 0; j < d; ++j) {
                for (std::size_t pt = 0; pt < size; ++pt) {
                    double acc = 0.0;
                    for (int k = 0; k < d; ++k) {
                        for (int p = 0; p < d; ++p) {
                            const double apl = c.a().entry(p, l)[pt];
                            const double apj = c.a().entry(p, j)[pt];
                            const double apk = c.a().entry(p, k)[pt];
                            const double dk_apj = c.da(k).entry(p, j)[pt];
                            const double dk_apl = c.da(k).entry(p, l)[pt];
                            const double dk_bil = c.db(k).entry(i, l)[pt];
                            const double dk_bij = c.db(k).entry(i, j)[pt];
                            const double bik = c.b().entry(i, k)[pt];
                            acc += bik * (apl * dk_apj + apj * dk_apl) -
                                   apk * (apj * dk_bil + apl * dk_bij);
                        }
                    }
                    const double r = std::abs(acc);
                    if (r > worst) {
                        worst = r;
                        arg = pt;
                    }
                }
            }
        }
    }
    rep.residual = worst;
    rep.location = unflatten(c.grid(), arg);
    rep.finalize();
    return rep;
}

ConditionReport check_BE_sufficient(const CoefficientSet& c) {
    ConditionReport rep;
    rep.condition = "BE-sufficient";
    rep.tolerance = c.tolerance();
    const int d = c.dim();
    const std::size_t size = c.grid().size();
    double worst = 0.0;
    std::size_t arg = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            for (std::size_t pt = 0; pt < size; ++pt) {
                double acc = 0.0;
                for (int k = 0; k < d; ++k) {
                    for (int q = 0; q < d; ++q) {
                        acc += c.a().entry(q, j)[pt] * c.da(k).entry(q, i)[pt] +
                               c.a().entry(q, i)[pt] * c.da(k).entry(q, j)[pt];
                    }
                }
                const double r = std::abs(acc);
                if (r > worst) {
                    worst = r;
                    arg = pt;
                }
            }
        }
    }
    rep.residual = worst;
    rep.location = unflatten(c.grid(), arg);
    rep.finalize();
    return rep;
}

ConditionReport check_killing(const CoefficientSet& c) {
    ConditionReport rep;
    rep.condition = "killing";
    rep.tolerance = c.tolerance();
    const int d = c.dim();
    const std::size_t size = c.grid().size();
    double worst = 0.0;
    std::size_t arg = 0;
    for (int i = 0; i < c.noise_dim(); ++i) {
        for (int l = 0; l < d; ++l) {
            for (int j = 0; j < d; ++j) {
                for (std::size_t pt = 0; pt < size; ++pt) {
                    const double r =
                        std::abs(c.db(j).entry(i, l)[pt] + c.db(l).entry(i, j)[pt]);
                    if (r > worst) {
                        worst = r;
                        arg = pt;
                    }
                }
            }
        }
    }
    rep.residual = worst;
    rep.location = unflatten(c.grid(), arg);
    rep.finalize();
    return rep;
}

}  // namespace svt
