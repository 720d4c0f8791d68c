#include "gpbound/lmi_certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gpbound {

namespace {

int sym_count(Eigen::Index n) { return static_cast<int>(n * (n + 1) / 2); }

sdp::LmiConstraint positive_p(Eigen::Index n, int m)
{
    const sdp::SymmetricBasis basis(n);
    return sdp::from_affine(m, [basis](const VectorXd& x) { return basis.unpack(x); }, true, "P > 0");
}

} // namespace

MatrixXd stability_block(const MatrixXd& A, const VectorXd& b, double delta, const MatrixXd& P)
{
    const Eigen::Index n = A.rows();
    if (A.cols() != n || b.size() != n || P.rows() != n || P.cols() != n)
        throw std::invalid_argument("stability_block: dimension mismatch");
    MatrixXd M(n + 1, n + 1);
    M(0, 0) = -1.0;
    const VectorXd Pb = P * b;
    M.block(1, 0, n, 1) = Pb;
    M.block(0, 1, 1, n) = Pb.transpose();
    M.block(1, 1, n, n) = A.transpose() * P + P * A + delta * P;
    return M;
}

sdp::LmiConstraint assemble_stability_lmi(const MatrixXd& A, const VectorXd& b, double delta, int decision_dim)
{
    if (!(delta > 0)) throw std::invalid_argument("assemble_stability_lmi: delta must be positive");
    const Eigen::Index n = A.rows();
    if (A.cols() != n || b.size() != n) throw std::invalid_argument("assemble_stability_lmi: dimension mismatch");
    if (decision_dim < sym_count(n)) throw std::invalid_argument("assemble_stability_lmi: decision vector too short");
    const sdp::SymmetricBasis basis(n);
    return sdp::from_affine(
        decision_dim, [&](const VectorXd& x) -> MatrixXd { return -stability_block(A, b, delta, basis.unpack(x)); },
        true, "vertex stability");
}

StabilityResult check_exponential_certificate(const Polytope& poly, double delta)
{
    poly.validate();
    const Eigen::Index n = poly.dim();
    const int m = sym_count(n);
    sdp::LmiProblem prob;
    prob.decision_dim = m;
    for (const auto& A : poly.vertices) prob.constraints.push_back(assemble_stability_lmi(A, poly.b_in, delta, m));
    prob.constraints.push_back(positive_p(n, m));

    const auto sol = sdp::solve(prob);
    StabilityResult out;
    out.status = sol.status;
    if (sol.ok()) out.P = sdp::SymmetricBasis(n).unpack(sol.x);
    return out;
}

GainResult compute_p2p_gain(const Polytope& poly, double delta)
{
    poly.validate();
    const Eigen::Index n = poly.dim();
    const int np = sym_count(n);
    const int m = np + 1; // last entry is gamma_bar
    const sdp::SymmetricBasis basis(n);

    sdp::LmiProblem prob;
    prob.decision_dim = m;
    for (const auto& A : poly.vertices) prob.constraints.push_back(assemble_stability_lmi(A, poly.b_in, delta, m));
    const VectorXd c = poly.c_out;
    prob.constraints.push_back(sdp::from_affine(
        m,
        [&](const VectorXd& x) {
            MatrixXd M(n + 1, n + 1);
            M(0, 0) = x(np);
            M.block(1, 0, n, 1) = c;
            M.block(0, 1, 1, n) = c.transpose();
            M.block(1, 1, n, n) = basis.unpack(x);
            return M;
        },
        true, "output ellipsoid"));
    prob.constraints.push_back(positive_p(n, m));
    VectorXd obj = VectorXd::Zero(m);
    obj(np) = 1.0;
    prob.objective = obj;

    const auto sol = sdp::solve(prob);
    GainResult out;
    out.status = sol.status;
    if (sol.status == SdpStatus::Optimal) {
        out.gamma_bar = sol.x(np);
        out.gamma = std::sqrt(out.gamma_bar / delta);
        out.P = basis.unpack(sol.x);
    }
    return out;
}

std::pair<double, double> default_delta_bracket(const Polytope& poly)
{
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& A : poly.vertices) hi = std::min(hi, 2.0 * std::abs(spectral_abscissa(A)));
    return {1e-4, hi};
}

BisectionResult bisect_delta(const Polytope& poly, BisectionOptions options)
{
    return bisect_delta(poly, default_delta_bracket(poly), options);
}

BisectionResult bisect_delta(const Polytope& poly, std::pair<double, double> range, BisectionOptions options)
{
    const auto [lo, hi] = range;
    if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("bisect_delta: need 0 < lo < hi");
    if (options.grid_points < 3) throw std::invalid_argument("bisect_delta: need at least 3 grid points");

    BisectionResult out;
    for (const auto& A : poly.vertices) {
        if (spectral_abscissa(A) >= 0.0) return out; // no delta > 0 can satisfy the vertex LMI
    }

    SdpStatus worst = SdpStatus::Infeasible;
    auto gamma_at = [&](double delta) {
        ++out.lmi_solves;
        auto r = compute_p2p_gain(poly, delta);
        if (r.status == SdpStatus::NumericalFailure) worst = SdpStatus::NumericalFailure;
        return r;
    };
    auto value = [](const GainResult& r) { return r.ok() ? r.gamma : std::numeric_limits<double>::infinity(); };

    const int N = options.grid_points;
    const double llo = std::log(lo), lhi = std::log(hi);
    std::vector<double> grid(static_cast<std::size_t>(N));
    std::vector<double> vals(static_cast<std::size_t>(N));
    int best = -1;
    GainResult best_r;
    double best_delta = 0.0;
    for (int i = 0; i < N; ++i) {
        grid[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (N - 1));
        auto r = gamma_at(grid[static_cast<std::size_t>(i)]);
        vals[static_cast<std::size_t>(i)] = value(r);
        if (r.ok() && (best < 0 || r.gamma < best_r.gamma)) {
            best = i;
            best_r = r;
            best_delta = grid[static_cast<std::size_t>(i)];
        }
    }
    if (best < 0) {
        out.status = worst;
        return out;
    }

    // Golden section in log(delta) on the bracket around the best grid sample.
    double a = std::log(grid[static_cast<std::size_t>(std::max(best - 1, 0))]);
    double b = std::log(grid[static_cast<std::size_t>(std::min(best + 1, N - 1))]);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    auto r1 = gamma_at(std::exp(x1)), r2 = gamma_at(std::exp(x2));
    auto consider = [&](const GainResult& r, double lx) {
        if (r.ok() && r.gamma < best_r.gamma) {
            best_r = r;
            best_delta = std::exp(lx);
        }
    };
    consider(r1, x1);
    consider(r2, x2);
    while (b - a > options.tol) {
        if (value(r1) <= value(r2)) {
            b = x2;
            x2 = x1;
            r2 = r1;
            x1 = b - phi * (b - a);
            r1 = gamma_at(std::exp(x1));
            consider(r1, x1);
        } else {
            a = x1;
            x1 = x2;
            r1 = r2;
            x2 = a + phi * (b - a);
            r2 = gamma_at(std::exp(x2));
            consider(r2, x2);
        }
    }

    LyapunovCertificate cert;
    cert.P = best_r.P;
    cert.delta = best_delta;
    cert.gamma_bar = best_r.gamma_bar;
    cert.gamma = std::sqrt(best_r.gamma_bar / best_delta);
    cert.polytope = poly;
    out.certificate = std::move(cert);
    out.status = SdpStatus::Optimal;
    return out;
}

double bound_output_trajectory(const TrajectoryBound& tb, double t)
{
    if (t < 0) throw std::invalid_argument("bound_output_trajectory: t must be non-negative");
    if (tb.u_inf < 0) throw std::invalid_argument("bound_output_trajectory: u_inf must be non-negative");
    const auto& cert = tb.certificate;
    const double v0 = tb.x0.dot(cert.P * tb.x0);
    const double V = std::exp(-cert.delta * t) * v0 + tb.u_inf * tb.u_inf / cert.delta;
    return ellipsoid_support(tb.c_query, cert.P, V);
}

HinfResult compute_hinf_gain(const Polytope& poly)
{
    poly.validate();
    HinfResult out;
    for (const auto& A : poly.vertices) {
        if (spectral_abscissa(A) >= 0.0) {
            out.status = SdpStatus::Infeasible;
            return out;
        }
    }
    const Eigen::Index n = poly.dim();
    const int np = sym_count(n);
    const int m = np + 1; // last entry is gamma^2
    const sdp::SymmetricBasis basis(n);
    const VectorXd b = poly.b_in;
    const VectorXd c = poly.c_out;

    sdp::LmiProblem prob;
    prob.decision_dim = m;
    for (const auto& A : poly.vertices) {
        prob.constraints.push_back(sdp::from_affine(
            m,
            [&](const VectorXd& x) -> MatrixXd {
                const MatrixXd P = basis.unpack(x);
                MatrixXd M(n + 1, n + 1);
                M.block(0, 0, n, n) = A.transpose() * P + P * A + c * c.transpose();
                M.block(0, n, n, 1) = P * b;
                M.block(n, 0, 1, n) = (P * b).transpose();
                M(n, n) = -x(np);
                return -M;
            },
            true, "bounded real"));
    }
    prob.constraints.push_back(positive_p(n, m));
    VectorXd obj = VectorXd::Zero(m);
    obj(np) = 1.0;
    prob.objective = obj;

    const auto sol = sdp::solve(prob);
    out.status = sol.status;
    if (sol.status == SdpStatus::Optimal) {
        out.gamma_inf = std::sqrt(sol.x(np));
        out.P = basis.unpack(sol.x);
    }
    return out;
}

} // namespace gpbound
