#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "gpbound/cli/commands.hpp"
#include "gpbound/cli/config.hpp"

using namespace gpbound;
using namespace gpbound::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("gpbound_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_config(const fs::path& dir, const json& doc)
{
    const auto path = dir / "config.json";
    std::ofstream(path) << doc.dump(2);
    return path.string();
}

json fixture(const std::string& name) { return load_json(resolve_path(name)); }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json short_demo(double duration)
{
    json doc = fixture("cubic_demo.json");
    doc["scenario"]["duration"] = duration;
    return doc;
}

} // namespace

TEST_CASE("config resolution fills defaults and rejects unknown or mistyped keys")
{
    const auto cfg = resolve_config(fixture("pneumatic_replica.json"));
    CHECK(cfg.plant_kind == "pneumatic");
    CHECK(cfg.doc["plant"].contains("epsilon_reg"));
    CHECK(cfg.doc["gpsol"]["sigma_r"] == 0.01);
    CHECK(cfg.scenario.K_I == 1000.0);
    CHECK(cfg.z_lim_from_bound);

    json bad = fixture("pneumatic_replica.json");
    bad["controller"]["K_X"] = 1.0;
    CHECK_THROWS_AS(resolve_config(bad), ConfigError);
    bad = fixture("pneumatic_replica.json");
    bad["extras"] = json::object();
    CHECK_THROWS_AS(resolve_config(bad), ConfigError);
    bad = fixture("pneumatic_replica.json");
    bad["controller"]["K_P"] = "four";
    CHECK_THROWS_AS(resolve_config(bad), ConfigError);
    bad = fixture("pneumatic_replica.json");
    bad["plant"]["kind"] = "steam";
    CHECK_THROWS_AS(resolve_config(bad), ConfigError);
}

TEST_CASE("set_param")
{
    json doc = fixture("pneumatic_replica.json");
    set_param(doc, "certification.e_y_lim", 0.07);
    CHECK(doc["certification"]["e_y_lim"] == 0.07);
    set_param(doc, "K_I", 500.0);
    CHECK(doc["controller"]["K_I"] == 500.0);
    CHECK_THROWS_AS(set_param(doc, "no_such_key", 1.0), ConfigError);
    CHECK_THROWS_AS(set_param(doc, "enabled", true), ConfigError); // present in gpsol and derl
}

TEST_CASE("certify: reference polytope")
{
    const auto dir = scratch("certify");
    std::ostringstream out, err;
    CertifyOptions opts;
    opts.out_dir = dir.string();
    REQUIRE(cmd_certify("cubic_demo_polytope.json", opts, out, err) == kOk);
    const json r = json::parse(out.str());
    CHECK(r["status"] == "Optimal");
    CHECK(r["gamma"].get<double>() == doctest::Approx(0.2653).epsilon(0.05));
    CHECK(r["gamma_hinf"].get<double>() == doctest::Approx(0.0757).epsilon(0.05));
    CHECK(r["gamma_hinf"].get<double>() <= r["gamma"].get<double>());
    CHECK(json::parse(slurp(dir / "certificate.json")) == r);

    std::ostringstream again, err2;
    REQUIRE(cmd_certify("cubic_demo_polytope.json", CertifyOptions{}, again, err2) == kOk);
    json a = r, b = json::parse(again.str());
    a.erase("wall_time_s");
    b.erase("wall_time_s");
    CHECK(a == b);
}

TEST_CASE("certify: failure modes map to exit codes")
{
    std::ostringstream out, err;
    CHECK(cmd_certify("unstable_vertex.json", CertifyOptions{}, out, err) == kInfeasible);
    CHECK(json::parse(out.str())["status"] == "Infeasible");
    CHECK(cmd_certify("does_not_exist.json", CertifyOptions{}, out, err) == kConfigError);

    const auto dir = scratch("certify_bad");
    json bad = fixture("cubic_demo_polytope.json");
    bad["certification"]["bogus"] = 1;
    CHECK(cmd_certify(write_config(dir, bad), CertifyOptions{}, out, err) == kConfigError);
}

TEST_CASE("simulate: outputs, echo and reproducibility")
{
    const auto dir = scratch("simulate");
    const auto path = write_config(dir, short_demo(3.0));
    SimulateOptions opts;
    opts.seed = 5;
    opts.out_dir = (dir / "a").string();
    fs::create_directories(*opts.out_dir);
    std::ostringstream out, err;
    REQUIRE(cmd_simulate(path, opts, out, err) == kOk);
    const json doc = json::parse(slurp(dir / "a" / "metrics.json"));
    CHECK(doc["config"]["scenario"]["seed"] == 5);
    CHECK(doc["config"]["scenario"].contains("early_window"));
    CHECK(doc["metrics"]["bound_violations"] == 0);
    CHECK(doc["metrics"]["samples"] == 3001);
    const std::string csv = slurp(dir / "a" / "series.csv");
    CHECK(csv.rfind("t, y, y_r, u, z, z_tilde, z_hat, z_bar, e_y, V\n", 0) == 0);

    opts.out_dir = (dir / "b").string();
    fs::create_directories(*opts.out_dir);
    REQUIRE(cmd_simulate(path, opts, out, err) == kOk);
    CHECK(slurp(dir / "b" / "series.csv") == csv);
}

TEST_CASE("simulate: error paths")
{
    const auto dir = scratch("simulate_bad");
    std::ostringstream out, err;
    CHECK(cmd_simulate("cubic_demo_polytope.json", SimulateOptions{}, out, err) == kConfigError);

    json zero_gain = short_demo(0.5);
    zero_gain["scenario"]["reference"] = {{"kind", "constant"}, {"value", 0.0}};
    zero_gain["certification"] = json::object();
    CHECK(cmd_simulate(write_config(dir, zero_gain), SimulateOptions{}, out, err) == kNumerical);

    json bad = short_demo(0.5);
    bad["scenario"]["T_s"] = -1.0;
    CHECK(cmd_simulate(write_config(dir, bad), SimulateOptions{}, out, err) == kConfigError);
}

TEST_CASE("sweep")
{
    const auto dir = scratch("sweep");
    json doc = fixture("pneumatic_replica.json");
    doc["scenario"]["duration"] = 2.0;
    doc["scenario"]["reference"] = {{"kind", "uniform_steps"}, {"lo", 1.3}, {"hi", 2.7}, {"hold", 0.5}, {"t1", 0.2}};
    const auto path = write_config(dir, doc);
    std::ostringstream out, err;

    SweepOptions none{"certification.e_y_lim", {}, 1, std::nullopt, std::nullopt};
    CHECK(cmd_sweep(path, none, out, err) == kConfigError);
    SweepOptions unknown{"no_such", {"1"}, 1, std::nullopt, std::nullopt};
    CHECK(cmd_sweep(path, unknown, out, err) == kConfigError);

    std::ostringstream table;
    SweepOptions one{"certification.e_y_lim", {"0.05"}, 1, std::nullopt, std::nullopt};
    REQUIRE(cmd_sweep(path, one, table, err) == kOk);
    std::istringstream lines(table.str());
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header ==
          "param,value,runs,z_lim,mean_cae,mean_early_cae,mean_e_y_inf,baseline_cae,baseline_early_cae,normalized_cae,"
          "normalized_early_cae");
    std::vector<std::string> cells;
    std::stringstream rs(row);
    for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 11);

    std::ostringstream sim_out;
    REQUIRE(cmd_simulate(path, SimulateOptions{}, sim_out, err) == kOk);
    const json m = json::parse(sim_out.str())["metrics"];
    CHECK(std::stod(cells[4]) == doctest::Approx(m["cae"].get<double>()).epsilon(1e-8));
    CHECK(std::stod(cells[3]) == doctest::Approx(m["z_lim_used"].get<double>()).epsilon(1e-8));
}

TEST_CASE("process exit codes")
{
    const std::string exe = GPBOUND_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int st = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
        return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    };
    CHECK(run("certify cubic_demo_polytope.json") == 0);
    CHECK(run("certify unstable_vertex.json") == 3);
    CHECK(run("certify") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("sweep pneumatic_replica.json --param K_I --values") == 2);
}
