#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpbound/types.hpp"

namespace gpbound::sdp {

// Affine matrix constraint  F0 + sum_i x_i F_i  >= 0  (or > 0 when strict).
// Negative-definiteness constraints are expressed by negating the map.
struct LmiConstraint {
    MatrixXd F0;
    std::vector<MatrixXd> Fi;
    bool strict = true;
    std::string label;

    Eigen::Index size() const { return F0.rows(); }
    MatrixXd evaluate(const VectorXd& x) const;
    // Margin applied to strict constraints: 1e-8 * (1 + ||F0||).
    double strictness_margin() const;
};

struct LmiProblem {
    int decision_dim = 0;
    std::vector<LmiConstraint> constraints;
    std::optional<VectorXd> objective;

    void validate() const;
};

enum class SdpStatus { Optimal, Feasible, Infeasible, NumericalFailure };

const char* to_string(SdpStatus s);

struct SdpSolution {
    VectorXd x;
    SdpStatus status = SdpStatus::NumericalFailure;
    std::vector<double> min_eigs;
    double objective = 0.0;
    int newton_steps = 0;

    bool ok() const { return status == SdpStatus::Optimal || status == SdpStatus::Feasible; }
};

struct SolverOptions {
    // Box |x_i| <= box_radius keeps phase I and the centering problems bounded.
    double box_radius = 1e6;
    double gap_tolerance = 1e-9;
    double barrier_growth = 20.0;
    int max_newton_steps = 2000;
    double max_condition = 1e12;
};

SdpSolution solve(const LmiProblem& problem, const SolverOptions& options = {});

// Smallest eigenvalue of a symmetric matrix; throws std::invalid_argument on asymmetry.
double min_eigenvalue(const MatrixXd& M);

// Builds a constraint from an affine map x -> F(x) by probing it at 0 and at each unit vector.
LmiConstraint from_affine(int decision_dim, const std::function<MatrixXd(const VectorXd&)>& map, bool strict,
                          std::string label = {});

// Coordinates of an n x n symmetric matrix in a decision vector, starting at `offset`.
class SymmetricBasis {
public:
    explicit SymmetricBasis(Eigen::Index n, Eigen::Index offset = 0) : n_(n), offset_(offset) {}

    Eigen::Index n() const { return n_; }
    Eigen::Index count() const { return n_ * (n_ + 1) / 2; }
    Eigen::Index offset() const { return offset_; }

    MatrixXd unpack(const VectorXd& x) const;
    void pack(const MatrixXd& P, VectorXd& x) const;

private:
    Eigen::Index n_;
    Eigen::Index offset_;
};

} // namespace gpbound::sdp
