#include <algorithm>
#include <atomic>
#include <future>
#include <stdexcept>
#include <thread>

#include "gpbound/derl.hpp"
#include "gpbound/sim/scenario.hpp"

namespace gpbound::sim {

namespace {

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

AblationTable run_ablation_suite(const ScenarioConfig& base, const std::vector<AblationVariant>& variants, int runs)
{
    if (runs < 1) throw std::invalid_argument("run_ablation_suite: runs must be at least 1");

    std::vector<ScenarioConfig> configs;
    std::vector<AblationRow> rows;
    ScenarioConfig off = base;
    off.gpsol_on = false;
    off.derl_on = false;
    off.estimate.reset();
    off.record_series = false;
    configs.push_back(off);
    AblationRow base_row;
    base_row.label = "baseline";
    rows.push_back(base_row);
    for (const auto& v : variants) {
        ScenarioConfig c = base;
        c.gpsol_on = v.gpsol_on;
        c.derl_on = v.derl_on;
        c.record_series = false;
        if (v.e_y_lim) {
            if (!base.bound_config) throw std::invalid_argument("run_ablation_suite: e_y_lim needs a bound_config");
            c.z_lim = compute_zlim(*v.e_y_lim, base.bound_config->gamma, base.bound_config->zdot_inf);
        }
        configs.push_back(c);
        AblationRow row;
        row.label = v.label;
        row.z_lim = c.derl_on ? c.z_lim : 0.0;
        rows.push_back(row);
    }

    const std::size_t jobs = configs.size() * static_cast<std::size_t>(runs);
    std::vector<RunMetrics> results(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            ScenarioConfig c = configs[j / static_cast<std::size_t>(runs)];
            c.seed = base.seed + j % static_cast<std::size_t>(runs);
            results[j] = run_scenario(c);
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(jobs)));
    std::vector<std::future<void>> pool;
    for (unsigned i = 0; i < threads; ++i) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();

    for (std::size_t v = 0; v < configs.size(); ++v) {
        auto& row = rows[v];
        std::vector<double> e_inf;
        for (int r = 0; r < runs; ++r) {
            const auto& m = results[v * static_cast<std::size_t>(runs) + static_cast<std::size_t>(r)];
            row.cae.push_back(m.cae);
            row.early_cae.push_back(m.early_cae);
            e_inf.push_back(m.e_y_inf);
        }
        row.mean_cae = mean(row.cae);
        row.mean_early_cae = mean(row.early_cae);
        row.mean_e_y_inf = mean(e_inf);
    }
    AblationTable table;
    table.baseline = rows.front();
    for (std::size_t v = 0; v < rows.size(); ++v) {
        rows[v].normalized_cae = rows[v].mean_cae / table.baseline.mean_cae;
        rows[v].normalized_early_cae = rows[v].mean_early_cae / table.baseline.mean_early_cae;
    }
    table.baseline = rows.front();
    table.rows.assign(rows.begin() + 1, rows.end());
    return table;
}

} // namespace gpbound::sim
