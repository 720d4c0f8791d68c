#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gpbound/cli/config.hpp"
#include "gpbound/lmi_certify.hpp"

namespace gpbound::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kInfeasible = 3, kNumerical = 4 };

struct CertifyOptions {
    std::optional<double> tol;
    std::optional<std::string> out_dir;
};

struct SimulateOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

struct SweepOptions {
    std::string param;
    std::vector<std::string> values;
    int runs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

// Polytope named by the config: explicit vertices, an explicit gain band, or the band extremized over Y_r +- e_y_lim.
Polytope config_polytope(const EffectiveConfig& cfg, std::optional<GainBand>* band_out = nullptr);

// Certificate and z_lim for a simulation config, if its certification section names a band.
std::optional<BoundConfig> config_bound(const EffectiveConfig& cfg);

json certify_report(const EffectiveConfig& cfg, int& exit_code);
json metrics_json(const sim::RunMetrics& m, const std::optional<BoundConfig>& bound);

int cmd_certify(const std::string& config_path, const CertifyOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const std::string& config_path, const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const std::string& config_path, const SweepOptions& opts, std::ostream& out, std::ostream& err);

// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

} // namespace gpbound::cli
