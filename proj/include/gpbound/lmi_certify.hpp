#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "gpbound/model_core.hpp"
#include "gpbound/sdp.hpp"

namespace gpbound {

using sdp::SdpStatus;

// Proof object: P > 0 and decay rate delta satisfying the vertex LMIs, plus the p2p gain they imply.
struct LyapunovCertificate {
    MatrixXd P;
    double delta = 0.0;
    double gamma_bar = 0.0;
    double gamma = 0.0;
    Polytope polytope;

    double lyapunov(const VectorXd& x) const { return x.dot(P * x); }
};

struct TrajectoryBound {
    LyapunovCertificate certificate;
    VectorXd x0;
    double u_inf = 0.0;
    VectorXd c_query;
};

class CertificationError : public std::runtime_error {
public:
    CertificationError(SdpStatus status, const std::string& what) : std::runtime_error(what), status_(status) {}
    SdpStatus status() const { return status_; }

private:
    SdpStatus status_;
};

// [[-1, b'P], [Pb, A'P + PA + delta P]] evaluated at a concrete P.
MatrixXd stability_block(const MatrixXd& A, const VectorXd& b, double delta, const MatrixXd& P);

// Constraint "stability_block < 0" over the decision vector whose first n(n+1)/2 entries hold P.
sdp::LmiConstraint assemble_stability_lmi(const MatrixXd& A, const VectorXd& b, double delta, int decision_dim);

struct StabilityResult {
    SdpStatus status = SdpStatus::NumericalFailure;
    MatrixXd P;
    bool ok() const { return status == SdpStatus::Feasible || status == SdpStatus::Optimal; }
};

StabilityResult check_exponential_certificate(const Polytope& poly, double delta);

struct GainResult {
    SdpStatus status = SdpStatus::NumericalFailure;
    double gamma_bar = 0.0;
    double gamma = 0.0;
    MatrixXd P;
    bool ok() const { return status == SdpStatus::Optimal; }
};

// Minimizes gamma_bar over P for fixed delta; gamma = sqrt(gamma_bar / delta).
GainResult compute_p2p_gain(const Polytope& poly, double delta);

// Default bracket: [1e-4, 2 * min_l |spectral abscissa(A_l)|].
std::pair<double, double> default_delta_bracket(const Polytope& poly);

struct BisectionOptions {
    double tol = 1e-3;
    int grid_points = 50;
};

struct BisectionResult {
    SdpStatus status = SdpStatus::Infeasible;
    std::optional<LyapunovCertificate> certificate;
    int lmi_solves = 0;
    bool ok() const { return certificate.has_value(); }
};

// Minimizes gamma(delta) over the bracket: log-grid scan, then golden section around the best sample.
BisectionResult bisect_delta(const Polytope& poly, std::pair<double, double> delta_range, BisectionOptions options = {});
BisectionResult bisect_delta(const Polytope& poly, BisectionOptions options = {});

// max { c'x : x'Px <= V } = sqrt(c' P^-1 c V).
template <typename DerivedC, typename DerivedP>
typename DerivedC::Scalar ellipsoid_support(const Eigen::MatrixBase<DerivedC>& c, const Eigen::MatrixBase<DerivedP>& P,
                                            typename DerivedC::Scalar V)
{
    using Scalar = typename DerivedC::Scalar;
    if (V < Scalar(0)) throw std::invalid_argument("ellipsoid_support: V must be non-negative");
    Eigen::LLT<MatrixX<Scalar>> llt(P);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("ellipsoid_support: P is not positive definite");
    using std::sqrt;
    const Scalar q = c.dot(llt.solve(c.derived()));
    return sqrt(q * V);
}

// Square root of c' P^-1 c (exp(-delta t) x0'P x0 + u_inf^2 / delta).
double bound_output_trajectory(const TrajectoryBound& tb, double t);

struct HinfResult {
    SdpStatus status = SdpStatus::NumericalFailure;
    double gamma_inf = 0.0;
    MatrixXd P;
    bool ok() const { return status == SdpStatus::Optimal; }
};

// Bounded-real-lemma upper bound on the H-infinity norm, common P over all vertices.
HinfResult compute_hinf_gain(const Polytope& poly);

} // namespace gpbound
