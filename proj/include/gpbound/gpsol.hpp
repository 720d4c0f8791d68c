#pragma once

#include <stdexcept>
#include <vector>

#include "gpbound/model_core.hpp"

namespace gpbound {

// GP submodel of the hidden function held on a fixed tensor grid of basis points.
struct GpGridModel {
    MatrixXd basis_points; // n_z x N
    VectorXd mu;           // basis means
    MatrixXd C;            // basis covariance
    double sigma_K = 1.0;
    VectorXd length_scale; // per input dimension
    double sigma_r = 1e-3;
    VectorXd lo;
    VectorXd hi;

    Eigen::Index size() const { return basis_points.cols(); }
    Eigen::Index input_dim() const { return basis_points.rows(); }

    MatrixXd K;                   // prior Gram matrix over the basis
    Eigen::LLT<MatrixXd> K_factor; // factor of K, jittered only if needed

    double kernel(const VectorXd& p, const VectorXd& q) const;
    // Interpolation weights J(zeta) = K^-1 k(B, zeta) and the prior conditional variance k(zeta,zeta) - k'J.
    void weights(const VectorXd& zeta, VectorXd& J, double& prior_var) const;
};

struct GpPrediction {
    double mean = 0.0;
    double var = 0.0;
    bool extrapolated = false;
};

// Uniform grid with N1 nodes per dimension, mu = 0 and C = prior Gram matrix.
GpGridModel init_grid(const std::vector<std::pair<double, double>>& bounds, int N1, double sigma_K, double length_scale,
                      double sigma_r);

// Conditional mean/variance at zeta given the basis belief; variance clamped to [sigma_r^2, sigma_K^2].
GpPrediction gp_predict(const GpGridModel& gp, const VectorXd& zeta);

struct LearnerState {
    GpGridModel gp;
    double y_est = 0.0;
    MatrixXd S; // joint covariance of (y_est, mu)
    double Q_x = 1e-10;
    double R_meas = 1e-10;

    static LearnerState create(GpGridModel gp, double y0, double y0_var, double Q_x, double R_meas);
    // Copies the basis block of S into gp.C.
    void sync();
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One predict/correct cycle: Euler-discretized plant with z = J(zeta) mu, then correction with y_meas.
// `zeta` and `u` are the inputs held over the step [t, t + T_s]; y_meas is measured at t + T_s.
LearnerState learner_step(const LearnerState& state, double y_meas, double u, const VectorXd& zeta,
                          const PlantModel& plant, double T_s, double t);

} // namespace gpbound
