#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "svitorus/cli.hpp"
#include "svitorus/io.hpp"
#include "svitorus/verify.hpp"

namespace py = pybind11;
using namespace svt;

namespace {

ScalarField field_from_array(const PeriodicGrid& g, py::array_t<double, py::array::c_style> arr) {
    const auto buf = arr.request();
    if (static_cast<std::size_t>(buf.size) != g.size()) {
        throw std::invalid_argument("array size does not match the grid");
    }
    std::vector<double> values(static_cast<const double*>(buf.ptr),
                               static_cast<const double*>(buf.ptr) + buf.size);
    return ScalarField(g, std::move(values));
}

py::array_t<double> field_to_array(const ScalarField& f) {
    const PeriodicGrid& g = f.grid();
    if (g.d == 1) {
        py::array_t<double> out(static_cast<py::ssize_t>(g.n));
        std::copy(f.data(), f.data() + f.size(), out.mutable_data());
        return out;
    }
    py::array_t<double> out({static_cast<py::ssize_t>(g.n), static_cast<py::ssize_t>(g.n)});
    std::copy(f.data(), f.data() + f.size(), out.mutable_data());
    return out;
}

py::dict verify_report_dict(const VerifyReport& rep) {
    py::dict d;
    d["name"] = rep.name;
    d["left"] = rep.left;
    d["right"] = rep.right;
    d["margin"] = rep.margin();
    d["stderr"] = rep.stderr_;
    d["abs_tol"] = rep.abs_tol;
    d["pass"] = rep.pass;
    d["constants_used"] = rep.constants_used;
    d["notes"] = rep.notes;
    return d;
}

py::dict condition_report_dict(const ConditionReport& rep) {
    py::dict d;
    d["condition"] = rep.condition;
    d["residual"] = rep.residual;
    d["tolerance"] = rep.tolerance;
    d["location"] = py::make_tuple(rep.location[0], rep.location[1]);
    d["pass"] = rep.pass;
    if (std::isfinite(rep.kappa)) d["kappa"] = rep.kappa;
    return d;
}

py::dict trajectory_dict(const Trajectory& tr) {
    py::dict d;
    d["times"] = py::array_t<double>(static_cast<py::ssize_t>(tr.times.size()), tr.times.data());
    d["norm_H2"] = py::array_t<double>(static_cast<py::ssize_t>(tr.norm_H2.size()), tr.norm_H2.data());
    d["psi_lambda"] =
        py::array_t<double>(static_cast<py::ssize_t>(tr.psi_lambda.size()), tr.psi_lambda.data());
    d["form_A"] = py::array_t<double>(static_cast<py::ssize_t>(tr.energy_A.size()), tr.energy_A.data());
    d["mean"] = py::array_t<double>(static_cast<py::ssize_t>(tr.mean.size()), tr.mean.data());
    d["final_state"] = field_to_array(tr.final_state);
    return d;
}

}  // namespace

PYBIND11_MODULE(_svitorus, m) {
    m.doc() = "Regularized stochastic p-Laplace / TV-flow laboratory on the torus";

    py::class_<PeriodicGrid>(m, "PeriodicGrid")
        .def(py::init<int, int>(), py::arg("d"), py::arg("n"))
        .def_readonly("d", &PeriodicGrid::d)
        .def_readonly("n", &PeriodicGrid::n)
        .def_property_readonly("spacing", &PeriodicGrid::spacing)
        .def("__repr__", [](const PeriodicGrid& g) {
            return "PeriodicGrid(d=" + std::to_string(g.d) + ", n=" + std::to_string(g.n) + ")";
        });

    py::class_<ScalarField>(m, "ScalarField")
        .def(py::init([](const PeriodicGrid& g, py::array_t<double, py::array::c_style> arr) {
                 return field_from_array(g, std::move(arr));
             }),
             py::arg("grid"), py::arg("values"))
        .def_property_readonly("grid", &ScalarField::grid)
        .def("to_numpy", &field_to_array);

    m.def("dft", [](const ScalarField& f) {
        Spectrum s = dft(f);
        py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(s.modes.size()),
                                              s.modes.data());
        return out;
    });
    m.def("gradient_arrays", [](const ScalarField& f) {
        VectorField g = gradient(f);
        py::list out;
        for (int c = 0; c < g.components(); ++c) out.append(field_to_array(g.comp(c)));
        return out;
    });
    m.def("laplacian", [](const ScalarField& f) { return field_to_array(laplacian(f)); });
    m.def("inner_H", &inner_H);
    m.def("norm_H2", &norm_H2);
    m.def("integral", &integral);
    m.def("random_band_limited_field",
          [](const PeriodicGrid& g, std::uint64_t seed, double s_norm) {
              return random_band_limited_field(g, seed, s_norm);
          },
          py::arg("grid"), py::arg("seed"), py::arg("s_norm") = 1.0);

    py::class_<ConvexPotential>(m, "ConvexPotential")
        .def_readonly("name", &ConvexPotential::name)
        .def_readonly("growth_C", &ConvexPotential::growth_C)
        .def_readonly("doubling_K", &ConvexPotential::doubling_K)
        .def("theta", [](const ConvexPotential& p, double r) { return p.theta(r); })
        .def("yosida_lipschitz", &ConvexPotential::yosida_lipschitz);
    m.def("make_potential", &make_potential);
    m.def("potential_catalog_keys", &potential_catalog_keys);
    m.def("eval_psi", [](const ConvexPotential& p, std::vector<double> z) {
        return eval_psi(p, std::span<const double>(z.data(), z.size()));
    });
    m.def("scalar_prox", &scalar_prox);
    m.def("yosida_grad", [](const ConvexPotential& p, std::vector<double> z, double lam) {
        return yosida_grad(p, std::span<const double>(z.data(), z.size()), lam);
    });
    m.def("moreau_eval", [](const ConvexPotential& p, std::vector<double> z, double lam) {
        return moreau_eval(p, std::span<const double>(z.data(), z.size()), lam);
    });
    m.def("verify_condition_N", [](const ConvexPotential& p, double r_max, int samples) {
        return verify_report_dict(verify_condition_N(p, r_max, samples));
    });
    m.def("subgrad_bound_check", [](const ConvexPotential& p, int samples) {
        return verify_report_dict(subgrad_bound_check(p, samples));
    });

    py::class_<CoefficientSet, std::shared_ptr<CoefficientSet>>(m, "CoefficientSet")
        .def_static("preset",
                    [](const std::string& name, const PeriodicGrid& g) {
                        return std::make_shared<CoefficientSet>(CoefficientSet::preset(name, g));
                    })
        .def_property_readonly("kappa", &CoefficientSet::kappa)
        .def_property_readonly("noise_dim", &CoefficientSet::noise_dim)
        .def("form_A", &CoefficientSet::form_A)
        .def("form_B", &CoefficientSet::form_B);
    m.def("check_E", [](std::shared_ptr<CoefficientSet> c) { return condition_report_dict(check_E(*c)); });
    m.def("check_D", [](std::shared_ptr<CoefficientSet> c) { return condition_report_dict(check_D(*c)); });
    m.def("check_R", [](std::shared_ptr<CoefficientSet> c) { return condition_report_dict(check_R(*c)); });
    m.def("check_BE_sufficient",
          [](std::shared_ptr<CoefficientSet> c) { return condition_report_dict(check_BE_sufficient(*c)); });
    m.def("check_killing",
          [](std::shared_ptr<CoefficientSet> c) { return condition_report_dict(check_killing(*c)); });

    py::class_<OperatorSet>(m, "OperatorSet")
        .def(py::init([](std::shared_ptr<CoefficientSet> c, double cg_tol, int cg_max_iter) {
                 return OperatorSet(std::move(c), CgOptions{cg_tol, cg_max_iter});
             }),
             py::arg("coefficients"), py::arg("cg_tol") = 1e-10, py::arg("cg_max_iter") = 500)
        .def("apply_La", [](const OperatorSet& o, const ScalarField& u) {
            return field_to_array(o.apply_La(u));
        })
        .def("apply_Lb", [](const OperatorSet& o, const ScalarField& u) {
            return field_to_array(o.apply_Lb(u));
        })
        .def("resolvent_Ja",
             [](const OperatorSet& o, const ScalarField& u, double delta) {
                 return field_to_array(o.resolvent_Ja(u, delta));
             })
        .def("apply_B",
             [](const OperatorSet& o, const ScalarField& u, double delta) {
                 VectorField b = o.apply_B(u, delta);
                 py::list out;
                 for (int i = 0; i < b.components(); ++i) out.append(field_to_array(b.comp(i)));
                 return out;
             })
        .def("apply_drift", [](const OperatorSet& o, const ScalarField& u, const ConvexPotential& p,
                               double lambda, double delta, double eps) {
            return field_to_array(o.apply_drift(u, p, lambda, delta, eps));
        });

    py::enum_<Scheme>(m, "Scheme")
        .value("explicit_euler", Scheme::explicit_euler)
        .value("semi_implicit_eps", Scheme::semi_implicit_eps)
        .value("semi_implicit_split", Scheme::semi_implicit_split);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("lambda_", &SolverConfig::lambda)
        .def_readwrite("delta", &SolverConfig::delta)
        .def_readwrite("eps", &SolverConfig::eps)
        .def_readwrite("dt", &SolverConfig::dt)
        .def_readwrite("T", &SolverConfig::horizon)
        .def_readwrite("paths", &SolverConfig::paths)
        .def_readwrite("seed", &SolverConfig::seed)
        .def_readwrite("grid_n", &SolverConfig::grid_n)
        .def_readwrite("grid_d", &SolverConfig::grid_d)
        .def_readwrite("scheme", &SolverConfig::scheme);

    m.def("simulate",
          [](const ScalarField& x, const SolverConfig& cfg, const OperatorSet& ops,
             const ConvexPotential& p, int path_index) {
              return trajectory_dict(simulate(x, cfg, ops, p, path_index));
          },
          py::arg("x"), py::arg("config"), py::arg("operators"), py::arg("potential"),
          py::arg("path_index") = 0);

    m.def("verify_energy_bound",
          [](const ScalarField& x, const SolverConfig& cfg, const OperatorSet& ops,
             const ConvexPotential& p) { return verify_report_dict(verify_energy_bound(x, cfg, ops, p)); });
    m.def("verify_contraction",
          [](const ScalarField& x, const ScalarField& y, const SolverConfig& cfg,
             const OperatorSet& ops, const ConvexPotential& p) {
              return verify_report_dict(verify_contraction(x, y, cfg, ops, p));
          });
    m.def("estimate_wdc_constant",
          [](const OperatorSet& ops, std::vector<double> betas, int samples, std::uint64_t seed) {
              double c_hat = 0.0;
              py::dict d = verify_report_dict(estimate_wdc_constant(ops, betas, samples, seed, &c_hat));
              d["c_hat"] = c_hat;
              return d;
          });
    m.def("verify_gradient_estimate",
          [](const OperatorSet& ops, int samples, std::vector<double> t_list, int substeps,
             std::uint64_t seed) {
              double k_hat = 0.0;
              py::dict d = verify_report_dict(
                  verify_gradient_estimate(ops, samples, t_list, substeps, seed, &k_hat));
              d["K_hat"] = k_hat;
              return d;
          });
}
