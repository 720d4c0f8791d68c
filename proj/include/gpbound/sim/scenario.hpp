#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpbound/adaptive_controller.hpp"
#include "gpbound/model_core.hpp"
#include "gpbound/sim/plants.hpp"

namespace gpbound::sim {

enum class SignalKind { Constant, UniformSteps, GaussianRamp };

struct SignalSpec {
    SignalKind kind = SignalKind::Constant;
    double value = 0.0; // constant level, or ramp start
    double lo = 0.0;
    double hi = 1.0;
    double hold = 1.0;
    double t1 = 0.0;    // low-pass constant for UniformSteps
    double sigma = 0.0;
    double rate = std::numeric_limits<double>::infinity();
};

enum class ControllerMode { Continuous, Discrete };

struct GpsolSettings {
    std::vector<std::pair<double, double>> bounds{{0.0, 5.0}};
    int n1 = 6;
    double sigma_K = 1.0;
    double length_scale = 2.5;
    double sigma_r = 1e-3;
    double Q_x = 1e-10;
    double R_meas = 1e-10;
};

struct ScenarioConfig {
    PlantModel plant;
    std::optional<PneumaticPlant> pneumatic; // when set, v is realized through the inverted inlet valve
    double K_P = 1.0;
    double K_I = 1.0;
    ControllerMode mode = ControllerMode::Discrete;

    SignalSpec reference;
    SignalSpec zeta;
    std::optional<SignalSpec> estimate; // independent z_hat signal, used when gpsol is off

    bool gpsol_on = false;
    bool derl_on = false;
    double z_lim = 0.0;
    double sigma_fac = 5.0;
    GpsolSettings gpsol;

    double T_s = 1e-3;
    double duration = 1.0;
    int substeps = 10;
    std::uint64_t seed = 0;
    std::optional<double> y0;     // default y_r(0)
    std::optional<double> z_bar0; // default z(0) - z_hat(0)
    double early_window = 10.0;

    std::optional<BoundConfig> bound_config;
    bool record_series = true;

    void validate() const;
};

struct TimeSeries {
    std::vector<double> t, y, y_r, u, z, z_tilde, z_hat, z_bar, e_y, V;

    std::size_t size() const { return t.size(); }
    void reserve(std::size_t n);
    void write_csv(std::ostream& os) const;
};

struct RunMetrics {
    double e_y_inf = 0.0;
    double cae = 0.0;
    double early_cae = 0.0;
    double zdot_e_inf = 0.0;
    long bound_violations = 0;
    long envelope_violations = 0;
    double envelope_ratio = 0.0; // max V / envelope
    long clamp_violations = 0;
    long derl_probabilistic = 0;
    long derl_deterministic = 0;
    std::size_t samples = 0;
    TimeSeries time_series;
};

RunMetrics run_scenario(const ScenarioConfig& cfg);

struct AblationVariant {
    std::string label;
    bool gpsol_on = true;
    bool derl_on = false;
    std::optional<double> e_y_lim; // sets z_lim through compute_zlim with the base certificate
};

struct AblationRow {
    std::string label;
    double z_lim = 0.0;
    double mean_cae = 0.0;
    double mean_early_cae = 0.0;
    double mean_e_y_inf = 0.0;
    double normalized_cae = 1.0;
    double normalized_early_cae = 1.0;
    std::vector<double> cae;
    std::vector<double> early_cae;
};

struct AblationTable {
    AblationRow baseline; // gpsol off, derl off
    std::vector<AblationRow> rows;
};

// Run r uses seed base.seed + r; every run starts from a fresh GP.
AblationTable run_ablation_suite(const ScenarioConfig& base, const std::vector<AblationVariant>& variants, int runs);

} // namespace gpbound::sim
