// fksobol: Sobol' indices of mean exit times and survival functionals of
// SDEs with uncertain coefficients, by stochastic Galerkin and double Monte Carlo.

#include "fksobol/error.hpp"
#include "fksobol/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Sobol' sensitivity of SDE exit-time and survival quantities"};
    app.require_subcommand(1);

    fksobol::CliRequest req;
    std::string mode;
    std::string out;
    std::uint64_t seed = 0;

    CLI::App* run = app.add_subcommand("run", "Run one pipeline from a config file and write report.json");
    run->add_option("--config", req.config_path, "Config file (YAML or JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--mode", mode, "elliptic | parabolic | mc-exit | mc-survival | compare")
        ->required()
        ->check(CLI::IsMember({"elliptic", "parabolic", "mc-exit", "mc-survival", "compare"}));
    CLI::Option* out_opt = run->add_option("--out", out, "Output directory (overrides output.dir)");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");

    CLI11_PARSE(app, argc, argv);

    try {
        req.mode = fksobol::mode_from_string(mode);
    } catch (const fksobol::Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    if (*out_opt) {
        req.out_dir = out;
    }
    if (*seed_opt) {
        req.seed = seed;
    }
    return fksobol::run_cli(req);
}
