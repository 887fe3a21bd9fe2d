#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svitorus/simulator.hpp"

namespace svt {

/// Thrown on malformed configuration (maps to exit code 2 at the CLI).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InitialConfig {
    std::string kind = "mode";  // mode | random-band | bump
    int mode_k = 1;
    double amplitude = 1.0;
    double s_norm = 1.0;
    double center = 0.5;
    double width = 0.25;
    double smoothing = 0.05;
};

struct CoefficientsConfig {
    std::string preset;  // combined preset name; empty when a/b are given
    nlohmann::json a;    // string spec or inline {"rows": [...]}
    nlohmann::json b;
};

struct VerifyConfig {
    std::vector<std::string> inequalities;  // energy | contraction | apriori | wdc | gradient | svi
    std::vector<std::string> conditions = {"E", "D", "R"};
    std::vector<double> beta_list = {4.0, 16.0, 64.0, 256.0};
    std::vector<double> t_list = {0.05, 0.1};
    int samples = 4;
    int substeps = 64;
    std::vector<double> lambda_list = {1e-1, 5e-2, 2.5e-2, 1.25e-2};
    std::vector<double> delta_list = {4e-2, 2e-2, 1e-2, 5e-3};
    std::vector<double> eps_list = {2e-1, 1e-1, 5e-2, 2.5e-2};
    std::string svi_elements = "self";  // self | zero | heat
    InitialConfig contraction_perturbation{.kind = "mode", .mode_k = 1, .amplitude = 0.5};
};

struct OutputConfig {
    std::string dir = "out";
    std::string stats_csv = "stats.csv";
    std::string reports_json = "reports.json";
    std::string resolved_config = "resolved_config.json";
    std::vector<double> snapshot_times;
    bool echo_config = true;
};

struct ExperimentConfig {
    SolverConfig solver;  // includes grid size via grid_n / grid_d
    std::string potential = "p-laplace:2";
    CoefficientsConfig coefficients;
    InitialConfig initial;
    VerifyConfig verify;
    OutputConfig output;

    static ExperimentConfig from_file(const std::filesystem::path& path);
    static ExperimentConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    ConvexPotential make_potential_instance() const;
    std::shared_ptr<const CoefficientSet> make_coefficients() const;
    ScalarField make_initial_field() const;
    ScalarField make_initial_field(const InitialConfig& init) const;
};

MatrixField matrix_from_spec(const nlohmann::json& spec, const PeriodicGrid& g, bool square);

}  // namespace svt
