#include "gpbound/adaptive_controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpbound/derl.hpp"

namespace gpbound {

ControllerState::ControllerState(double z_bar0, double k_p, double k_i) : z_bar(z_bar0), K_P(k_p), K_I(k_i)
{
    if (!(k_p > 0) || !(k_i > 0)) throw std::invalid_argument("ControllerState: gains must be positive");
}

double control_input(double y, double y_r, double ydot_r, double z_bar, double z_hat, const PlantModel& plant, double K_P,
                     double t)
{
    const double b = plant.b(y, t);
    if (!(std::abs(b) >= 1e-9)) throw SingularInputGain("control_input: |b(y,t)| below 1e-9");
    const double e_y = y_r - y;
    return (ydot_r + K_P * e_y - plant.a(y, t) - plant.e(y, t) * (z_bar + z_hat)) / b;
}

ControllerState update_zbar(const ControllerState& state, double e_y, double e_gain, double T_s)
{
    if (!(T_s > 0)) throw std::invalid_argument("update_zbar: T_s must be positive");
    ControllerState next = state;
    next.z_bar += T_s * zbar_rate(state.K_I, e_gain, e_y);
    return next;
}

GainBand extremize_gain(const PlantModel& plant, std::pair<double, double> y_range, int samples, double t0)
{
    const auto [lo, hi] = y_range;
    if (!(lo <= hi)) throw std::invalid_argument("extremize_gain: empty range");
    if (samples < 2) throw std::invalid_argument("extremize_gain: need at least 2 samples");
    double e_min = std::numeric_limits<double>::infinity();
    double e_max = -e_min;
    auto visit = [&](double y) {
        const double e = plant.e(y, t0);
        e_min = std::min(e_min, e);
        e_max = std::max(e_max, e);
    };
    visit(lo);
    visit(hi);
    for (int i = 0; i < samples; ++i) visit(lo + (hi - lo) * (i + 0.5) / samples);
    return {e_min, e_max};
}

BoundConfig derive_bound_config(const PlantModel& plant, std::pair<double, double> y_r_range, double e_y_lim, double K_P,
                                double K_I, double zdot_inf, double t0)
{
    if (!(e_y_lim > 0)) throw std::invalid_argument("derive_bound_config: e_y_lim must be positive");
    BoundConfig cfg;
    cfg.y_r_range = y_r_range;
    cfg.e_y_lim = e_y_lim;
    cfg.zdot_inf = zdot_inf;
    cfg.gain_band = extremize_gain(plant, {y_r_range.first - e_y_lim, y_r_range.second + e_y_lim}, 1000, t0);
    const auto poly = build_error_polytope(K_P, K_I, cfg.gain_band);
    auto result = bisect_delta(poly);
    if (!result.ok()) {
        throw CertificationError(result.status == SdpStatus::NumericalFailure ? SdpStatus::NumericalFailure
                                                                               : SdpStatus::Infeasible,
                                 "derive_bound_config: no certificate for the error polytope");
    }
    cfg.certificate = *result.certificate;
    cfg.gamma = cfg.certificate.gamma;
    cfg.z_lim = compute_zlim(e_y_lim, cfg.gamma, zdot_inf);
    return cfg;
}

} // namespace gpbound
