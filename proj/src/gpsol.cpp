#include "gpbound/gpsol.hpp"

#include <algorithm>
#include <cmath>

namespace gpbound {

double GpGridModel::kernel(const VectorXd& p, const VectorXd& q) const
{
    const double r2 = ((p - q).array() / length_scale.array()).square().sum();
    return sigma_K * sigma_K * std::exp(-0.5 * r2);
}

void GpGridModel::weights(const VectorXd& zeta, VectorXd& J, double& prior_var) const
{
    VectorXd k(size());
    for (Eigen::Index j = 0; j < size(); ++j) k(j) = kernel(zeta, basis_points.col(j));
    J = K_factor.solve(k);
    prior_var = std::max(0.0, sigma_K * sigma_K - k.dot(J));
}

GpGridModel init_grid(const std::vector<std::pair<double, double>>& bounds, int N1, double sigma_K, double length_scale,
                      double sigma_r)
{
    if (bounds.empty()) throw std::invalid_argument("init_grid: need at least one input dimension");
    if (N1 < 2) throw std::invalid_argument("init_grid: N1 must be at least 2");
    if (!(sigma_K > 0) || !(length_scale > 0)) throw std::invalid_argument("init_grid: sigma_K and L must be positive");
    if (!(sigma_r > 0) || !(sigma_r < sigma_K)) throw std::invalid_argument("init_grid: need 0 < sigma_r < sigma_K");
    for (const auto& [lo, hi] : bounds) {
        if (!(lo < hi)) throw std::invalid_argument("init_grid: each bound needs lo < hi");
    }

    GpGridModel gp;
    const auto nz = static_cast<Eigen::Index>(bounds.size());
    Eigen::Index total = 1;
    for (Eigen::Index d = 0; d < nz; ++d) total *= N1;
    gp.basis_points.resize(nz, total);
    gp.lo.resize(nz);
    gp.hi.resize(nz);
    for (Eigen::Index d = 0; d < nz; ++d) {
        gp.lo(d) = bounds[static_cast<std::size_t>(d)].first;
        gp.hi(d) = bounds[static_cast<std::size_t>(d)].second;
    }
    // First dimension varies fastest.
    for (Eigen::Index j = 0; j < total; ++j) {
        Eigen::Index rem = j;
        for (Eigen::Index d = 0; d < nz; ++d) {
            const Eigen::Index idx = rem % N1;
            rem /= N1;
            gp.basis_points(d, j) = gp.lo(d) + (gp.hi(d) - gp.lo(d)) * static_cast<double>(idx) / (N1 - 1);
        }
    }
    gp.sigma_K = sigma_K;
    gp.sigma_r = sigma_r;
    gp.length_scale = VectorXd::Constant(nz, length_scale);

    gp.K.resize(total, total);
    for (Eigen::Index i = 0; i < total; ++i)
        for (Eigen::Index j = 0; j < total; ++j) gp.K(i, j) = gp.kernel(gp.basis_points.col(i), gp.basis_points.col(j));
    // Jitter only when the plain factorization fails.
    gp.K_factor.compute(gp.K);
    for (double jitter = 1e-12; gp.K_factor.info() != Eigen::Success && jitter < 1e-2; jitter *= 10.0)
        gp.K_factor.compute(gp.K + jitter * sigma_K * sigma_K * MatrixXd::Identity(total, total));
    if (gp.K_factor.info() != Eigen::Success) throw NumericalFailure("init_grid: prior Gram matrix is not positive definite");
    gp.mu = VectorXd::Zero(total);
    gp.C = gp.K;
    return gp;
}

GpPrediction gp_predict(const GpGridModel& gp, const VectorXd& zeta)
{
    if (zeta.size() != gp.input_dim()) throw std::invalid_argument("gp_predict: input dimension mismatch");
    GpPrediction out;
    out.extrapolated = (zeta.array() < gp.lo.array()).any() || (zeta.array() > gp.hi.array()).any();
    VectorXd J;
    double prior_var = 0.0;
    gp.weights(zeta, J, prior_var);
    out.mean = J.dot(gp.mu);
    const double var = prior_var + J.dot(gp.C * J);
    out.var = std::clamp(var, gp.sigma_r * gp.sigma_r, gp.sigma_K * gp.sigma_K);
    return out;
}

LearnerState LearnerState::create(GpGridModel gp, double y0, double y0_var, double Q_x, double R_meas)
{
    LearnerState s;
    const Eigen::Index N = gp.size();
    s.S = MatrixXd::Zero(N + 1, N + 1);
    s.S(0, 0) = y0_var;
    s.S.bottomRightCorner(N, N) = gp.C;
    s.gp = std::move(gp);
    s.y_est = y0;
    s.Q_x = Q_x;
    s.R_meas = R_meas;
    return s;
}

void LearnerState::sync() { gp.C = S.bottomRightCorner(gp.size(), gp.size()); }

namespace {

double d_dy(const std::function<double(double, double)>& f, double y, double t)
{
    const double h = 1e-6 * (1.0 + std::abs(y));
    return (f(y + h, t) - f(y - h, t)) / (2.0 * h);
}

} // namespace

LearnerState learner_step(const LearnerState& state, double y_meas, double u, const VectorXd& zeta,
                          const PlantModel& plant, double T_s, double t)
{
    if (!(T_s > 0)) throw std::invalid_argument("learner_step: T_s must be positive");
    LearnerState next = state;
    const GpGridModel& gp = state.gp;
    const Eigen::Index N = gp.size();

    VectorXd J;
    double prior_var = 0.0;
    gp.weights(zeta, J, prior_var);
    const double y = state.y_est;
    const double z = J.dot(gp.mu);
    const double e = plant.e(y, t);

    // Prediction.
    next.y_est = y + T_s * plant.rhs(y, t, u, z);
    MatrixXd F = MatrixXd::Identity(N + 1, N + 1);
    F(0, 0) += T_s * (d_dy(plant.a, y, t) + d_dy(plant.b, y, t) * u + d_dy(plant.e, y, t) * z);
    F.block(0, 1, 1, N) = T_s * e * J.transpose();
    next.S = F * state.S * F.transpose();
    next.S(0, 0) += state.Q_x + T_s * T_s * e * e * prior_var;

    // Correction with H = [1, 0, ..., 0].
    const double innovation_var = next.S(0, 0) + state.R_meas;
    if (!(innovation_var > 0) || !std::isfinite(innovation_var))
        throw NumericalFailure("learner_step: innovation covariance is not positive");
    const VectorXd gain = next.S.col(0) / innovation_var;
    const double innovation = y_meas - next.y_est;
    next.y_est += gain(0) * innovation;
    next.gp.mu += gain.tail(N) * innovation;

    MatrixXd IKH = MatrixXd::Identity(N + 1, N + 1);
    IKH.col(0) -= gain;
    next.S = IKH * next.S * IKH.transpose() + state.R_meas * gain * gain.transpose();
    next.S = 0.5 * (next.S + next.S.transpose()).eval();

    // Keep basis variances inside [sigma_r^2, sigma_K^2]; both operations preserve positive semi-definiteness.
    const double lo = gp.sigma_r * gp.sigma_r, hi = gp.sigma_K * gp.sigma_K;
    for (Eigen::Index j = 1; j <= N; ++j) {
        const double v = next.S(j, j);
        if (v > hi) {
            const double f = std::sqrt(hi / v);
            next.S.row(j) *= f;
            next.S.col(j) *= f;
            next.S(j, j) = hi;
        } else if (v < lo) {
            next.S(j, j) = lo;
        }
    }
    next.sync();
    return next;
}

} // namespace gpbound
