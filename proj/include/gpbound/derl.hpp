#pragma once

namespace gpbound {

enum class DerlBranch { Probabilistic, Deterministic };

// Rate limiter on the GP prediction. sigma_fac is the two-sided Gaussian quantile for p_lim.
struct DerlState {
    double z_hat = 0.0;
    double z_lim = 0.0;
    double p_lim = 0.99;
    double sigma_fac = 2.5758293035489;
    double T_s = 1e-3;

    static DerlState from_probability(double z_lim, double p_lim, double T_s, double z_hat0 = 0.0);
    static DerlState from_sigma_factor(double z_lim, double sigma_fac, double T_s, double z_hat0 = 0.0);
};

struct DerlOutput {
    double z_hat = 0.0;
    DerlBranch branch = DerlBranch::Deterministic;
};

// Passes z_tilde through when |z_tilde - z_hat| + sigma_fac sqrt(var_tilde + var_prev) <= z_lim T_s,
// otherwise moves z_hat toward z_tilde by at most z_lim T_s. Updates state.z_hat.
DerlOutput derl_step(DerlState& state, double z_tilde, double var_tilde, double var_prev);

// max(e_y_lim / gamma - zdot_inf, 0)
double compute_zlim(double e_y_lim, double gamma, double zdot_inf);

// x with P(|N(0,1)| <= x) = p.
double two_sided_gaussian_quantile(double p);
double two_sided_gaussian_probability(double x);

} // namespace gpbound
