#include <iostream>

#include <CLI11.hpp>

#include "gpbound/cli/commands.hpp"

int main(int argc, char** argv)
{
    using namespace gpbound::cli;
    CLI::App app{"Peak-to-peak bound certification and closed-loop simulation"};
    app.require_subcommand(1);

    std::string config;
    CertifyOptions cert_opts;
    SimulateOptions sim_opts;
    SweepOptions sweep_opts;
    std::string out_dir;
    double tol = 0.0;
    std::uint64_t seed = 0;

    auto* certify = app.add_subcommand("certify", "Certify the p2p gain of a configured polytope");
    certify->add_option("config", config, "Config JSON (fixture root via GPBOUND_FIXTURES)")->required();
    auto* tol_opt = certify->add_option("--tol", tol, "Relative tolerance on delta");
    auto* cert_out = certify->add_option("--out-dir", out_dir, "Directory for certificate.json");

    auto* simulate = app.add_subcommand("simulate", "Run one closed-loop scenario");
    simulate->add_option("config", config, "Config JSON")->required();
    auto* sim_seed = simulate->add_option("--seed", seed, "Scenario seed");
    auto* sim_out = simulate->add_option("--out-dir", out_dir, "Directory for metrics.json and series.csv");

    auto* sweep = app.add_subcommand("sweep", "Sweep one config parameter over seeded runs");
    sweep->add_option("config", config, "Config JSON")->required();
    sweep->add_option("--param", sweep_opts.param, "Parameter, section.key or a unique key")->required();
    sweep->add_option("--values", sweep_opts.values, "Values to sweep")->required()->expected(0, -1);
    sweep->add_option("--runs", sweep_opts.runs, "Seeds per value")->default_val(1);
    auto* sweep_seed = sweep->add_option("--seed", seed, "First seed");
    auto* sweep_out = sweep->add_option("--out-dir", out_dir, "Directory for sweep.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    if (certify->parsed()) {
        if (*tol_opt) cert_opts.tol = tol;
        if (*cert_out) cert_opts.out_dir = out_dir;
        return cmd_certify(config, cert_opts, std::cout, std::cerr);
    }
    if (simulate->parsed()) {
        if (*sim_seed) sim_opts.seed = seed;
        if (*sim_out) sim_opts.out_dir = out_dir;
        return cmd_simulate(config, sim_opts, std::cout, std::cerr);
    }
    if (*sweep_seed) sweep_opts.seed = seed;
    if (*sweep_out) sweep_opts.out_dir = out_dir;
    return cmd_sweep(config, sweep_opts, std::cout, std::cerr);
}
