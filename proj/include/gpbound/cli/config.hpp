#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "gpbound/model_core.hpp"
#include "gpbound/sim/scenario.hpp"

namespace gpbound::cli {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CertSettings {
    std::optional<std::pair<double, double>> y_r_range;
    std::optional<double> e_y_lim;
    double zdot_inf = 0.0;
    std::optional<GainBand> gain_band;
    double tol = 1e-3;
    int grid_points = 50;
    std::optional<std::pair<double, double>> delta_range;
    bool hinf = true;
};

// Typed view of a config document with every default filled in.
struct EffectiveConfig {
    json doc; // echo of the resolved document
    std::string plant_kind;
    std::optional<Polytope> polytope;
    sim::ScenarioConfig scenario;
    CertSettings cert;
    bool z_lim_from_bound = false; // derl.z_lim absent: take it from the certified bound
};

// Defaults for the given plant kind ("cubic_demo", "pneumatic", "polytope").
json default_config(const std::string& plant_kind);

// Merges `user` over the defaults; unknown keys and type mismatches raise ConfigError.
EffectiveConfig resolve_config(const json& user);

json load_json(const std::string& path);
EffectiveConfig load_config(const std::string& path);

// Resolves a path directly, or relative to the fixture root (GPBOUND_FIXTURES, else the source tree).
std::string resolve_path(const std::string& path);
std::string fixture_root();

// Sets a dotted key ("certification.e_y_lim") or a bare key unique across sections.
void set_param(json& user, const std::string& param, const json& value);

} // namespace gpbound::cli
