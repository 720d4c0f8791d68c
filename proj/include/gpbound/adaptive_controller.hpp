#pragma once

#include <utility>

#include "gpbound/lmi_certify.hpp"
#include "gpbound/model_core.hpp"

namespace gpbound {

struct ControllerState {
    double z_bar = 0.0;
    double K_P = 1.0;
    double K_I = 1.0;

    ControllerState() = default;
    ControllerState(double z_bar0, double k_p, double k_i);
};

struct BoundConfig {
    std::pair<double, double> y_r_range;
    double e_y_lim = 0.0;
    GainBand gain_band{0.0, 0.0};
    double gamma = 0.0;
    double z_lim = 0.0;
    double zdot_inf = 0.0;
    LyapunovCertificate certificate;
};

class SingularInputGain : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// u = (ydot_r + K_P e_y - a - e (z_bar + z_hat)) / b with e_y = y_r - y.
double control_input(double y, double y_r, double ydot_r, double z_bar, double z_hat, const PlantModel& plant, double K_P,
                     double t);

// Parameter update  d(z_bar)/dt = -K_I e(y,t) e_y.
inline double zbar_rate(double K_I, double e_gain, double e_y) { return -K_I * e_gain * e_y; }

// One forward-Euler step of the update law.
ControllerState update_zbar(const ControllerState& state, double e_y, double e_gain, double T_s);

// Extremizes e(y, t0) over [y_r^- - e_y_lim, y_r^+ + e_y_lim] on `samples` points plus the endpoints.
GainBand extremize_gain(const PlantModel& plant, std::pair<double, double> y_range, int samples = 1000, double t0 = 0.0);

// Gain band, p2p certificate of the resulting error polytope, then z_lim. Throws CertificationError.
BoundConfig derive_bound_config(const PlantModel& plant, std::pair<double, double> y_r_range, double e_y_lim, double K_P,
                                double K_I, double zdot_inf, double t0 = 0.0);

} // namespace gpbound
