#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svitorus/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Regularized stochastic p-Laplace / TV-flow laboratory on the torus"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    bool force = false;
    std::vector<std::string> inequality_names;
    std::string rate_parameter = "lambda";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--out-dir", out_dir, "override output directory");
        cmd->add_option("--seed", seed_override, "override the master seed")
            ->each([&](const std::string&) { seed_given = true; });
        cmd->add_flag("--force", force, "proceed even if coefficient conditions fail");
    };

    CLI::App* check = app.add_subcommand("check", "run the coefficient condition checkers");
    add_common(check);
    CLI::App* simulate = app.add_subcommand("simulate", "integrate the SPDE and emit statistics");
    add_common(simulate);
    CLI::App* verify = app.add_subcommand("verify", "verify the quantitative inequalities");
    add_common(verify);
    verify->add_option("names", inequality_names, "inequality names (default: config list)");
    CLI::App* rate = app.add_subcommand("rate-study", "coupled convergence-rate study");
    add_common(rate);
    rate->add_option("--param", rate_parameter, "lambda | delta | eps");

    CLI11_PARSE(app, argc, argv);

    try {
        svt::ExperimentConfig cfg = svt::ExperimentConfig::from_file(config_path);
        svt::CliOverrides over;
        if (seed_given) over.seed = seed_override;
        if (!out_dir.empty()) over.out_dir = out_dir;
        over.force = force;

        if (check->parsed()) return svt::cmd_check(std::move(cfg), over);
        if (simulate->parsed()) return svt::cmd_simulate(std::move(cfg), over);
        if (verify->parsed()) return svt::cmd_verify(std::move(cfg), inequality_names, over);
        if (rate->parsed()) return svt::cmd_rate_study(std::move(cfg), rate_parameter, over);
        return 2;
    } catch (const svt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const svt::BlowupError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
