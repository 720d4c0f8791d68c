#include "gpbound/derl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpbound {

double two_sided_gaussian_probability(double x) { return std::erf(x / std::sqrt(2.0)); }

double two_sided_gaussian_quantile(double p)
{
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("two_sided_gaussian_quantile: p must lie in (0,1)");
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (two_sided_gaussian_probability(mid) < p ? lo : hi) = mid;
    }
    return hi;
}

DerlState DerlState::from_probability(double z_lim, double p_lim, double T_s, double z_hat0)
{
    if (!(z_lim >= 0)) throw std::invalid_argument("DerlState: z_lim must be non-negative");
    if (!(T_s > 0)) throw std::invalid_argument("DerlState: T_s must be positive");
    DerlState s;
    s.z_lim = z_lim;
    s.p_lim = p_lim;
    s.sigma_fac = two_sided_gaussian_quantile(p_lim);
    s.T_s = T_s;
    s.z_hat = z_hat0;
    return s;
}

DerlState DerlState::from_sigma_factor(double z_lim, double sigma_fac, double T_s, double z_hat0)
{
    if (!(sigma_fac > 0)) throw std::invalid_argument("DerlState: sigma_fac must be positive");
    DerlState s = from_probability(z_lim, 0.5, T_s, z_hat0);
    s.sigma_fac = sigma_fac;
    s.p_lim = two_sided_gaussian_probability(sigma_fac);
    return s;
}

DerlOutput derl_step(DerlState& state, double z_tilde, double var_tilde, double var_prev)
{
    const double step_lim = state.z_lim * state.T_s;
    const double increment = z_tilde - state.z_hat;
    const double spread = state.sigma_fac * std::sqrt(std::max(0.0, var_tilde) + std::max(0.0, var_prev));
    DerlOutput out;
    if (std::abs(increment) + spread <= step_lim) {
        out.branch = DerlBranch::Probabilistic;
        out.z_hat = z_tilde;
    } else {
        out.branch = DerlBranch::Deterministic;
        out.z_hat = state.z_hat + std::clamp(increment, -step_lim, step_lim);
    }
    state.z_hat = out.z_hat;
    return out;
}

double compute_zlim(double e_y_lim, double gamma, double zdot_inf)
{
    if (!(gamma > 0)) throw std::invalid_argument("compute_zlim: gamma must be positive");
    return std::max(e_y_lim / gamma - zdot_inf, 0.0);
}

} // namespace gpbound
