#include "gpbound/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gpbound::sdp {

namespace {

// Barrier subproblem over z:  minimize w'z  s.t.  G_j(z) > 0,  a_k'z + r_k > 0.
struct BarrierProblem {
    struct Block {
        MatrixXd H0;
        std::vector<MatrixXd> H;
    };
    Eigen::Index dim = 0;
    std::vector<Block> blocks;
    MatrixXd lin_a; // one row per scalar inequality
    VectorXd lin_r;
    VectorXd w;

    double nu() const
    {
        double total = static_cast<double>(lin_r.size());
        for (const auto& b : blocks) total += static_cast<double>(b.H0.rows());
        return total;
    }

    MatrixXd block_value(std::size_t j, const VectorXd& z) const
    {
        MatrixXd G = blocks[j].H0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (z(i) != 0.0) G.noalias() += z(i) * blocks[j].H[static_cast<std::size_t>(i)];
        }
        return G;
    }

    // Barrier value; +inf outside the domain.
    double barrier(const VectorXd& z, double t) const
    {
        double phi = t * w.dot(z);
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            Eigen::LLT<MatrixXd> llt(block_value(j, z));
            if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
            const VectorXd diag = llt.matrixLLT().diagonal();
            if ((diag.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
            phi -= 2.0 * diag.array().log().sum();
        }
        const VectorXd slack = lin_a * z + lin_r;
        if ((slack.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
        phi -= slack.array().log().sum();
        return phi;
    }
};

enum class CenterResult { Ok, NumericalFailure };

CenterResult center(const BarrierProblem& bp, VectorXd& z, double t, int& steps, int max_steps)
{
    const Eigen::Index q = bp.dim;
    for (;;) {
        if (++steps > max_steps) return CenterResult::NumericalFailure;
        VectorXd grad = t * bp.w;
        MatrixXd hess = MatrixXd::Zero(q, q);
        std::vector<MatrixXd> W(static_cast<std::size_t>(q));
        for (std::size_t j = 0; j < bp.blocks.size(); ++j) {
            Eigen::LLT<MatrixXd> llt(bp.block_value(j, z));
            if (llt.info() != Eigen::Success) return CenterResult::NumericalFailure;
            for (Eigen::Index i = 0; i < q; ++i) {
                MatrixXd Wi = llt.matrixL().solve(bp.blocks[j].H[static_cast<std::size_t>(i)]);
                W[static_cast<std::size_t>(i)] = llt.matrixL().solve(Wi.transpose());
                grad(i) -= W[static_cast<std::size_t>(i)].trace();
            }
            for (Eigen::Index i = 0; i < q; ++i) {
                for (Eigen::Index k = 0; k <= i; ++k) {
                    const double v = W[static_cast<std::size_t>(i)].cwiseProduct(W[static_cast<std::size_t>(k)]).sum();
                    hess(i, k) += v;
                    if (k != i) hess(k, i) += v;
                }
            }
        }
        const VectorXd slack = bp.lin_a * z + bp.lin_r;
        const VectorXd inv = slack.cwiseInverse();
        grad.noalias() -= bp.lin_a.transpose() * inv;
        hess.noalias() += bp.lin_a.transpose() * inv.cwiseAbs2().asDiagonal() * bp.lin_a;

        const VectorXd hd = hess.diagonal();
        if ((hd.array() <= 0.0).any() || !hess.allFinite() || !grad.allFinite()) return CenterResult::NumericalFailure;
        const VectorXd scale = hd.cwiseSqrt().cwiseInverse();
        const MatrixXd hs = scale.asDiagonal() * hess * scale.asDiagonal();
        Eigen::LDLT<MatrixXd> ldlt(hs);
        if (ldlt.info() != Eigen::Success) return CenterResult::NumericalFailure;
        const VectorXd step = scale.asDiagonal() * ldlt.solve(-(scale.asDiagonal() * grad));
        if (!step.allFinite()) return CenterResult::NumericalFailure;

        const double decrement = -grad.dot(step);
        if (decrement / 2.0 <= 1e-10) return CenterResult::Ok;

        const double phi0 = bp.barrier(z, t);
        double alpha = 1.0;
        while (alpha > 1e-12) {
            const double phi = bp.barrier(z + alpha * step, t);
            if (std::isfinite(phi) && phi <= phi0 - 0.01 * alpha * decrement) break;
            alpha *= 0.5;
        }
        if (alpha <= 1e-12) return CenterResult::Ok; // no further progress at this t
        const VectorXd next = z + alpha * step;
        if (next == z) return CenterResult::Ok;
        z = next;
    }
}

enum class BarrierOutcome { Converged, StoppedEarly, NumericalFailure };

// Path following; `stop_when` may end the run early (phase I uses it on the slack variable).
BarrierOutcome run_barrier(const BarrierProblem& bp, VectorXd& z, const SolverOptions& opt, int& steps,
                           double gap_tol, const std::function<bool(const VectorXd&, double)>& stop_when)
{
    const double nu = bp.nu();
    double t = 1.0;
    for (int outer = 0; outer < 200; ++outer) {
        if (center(bp, z, t, steps, opt.max_newton_steps) != CenterResult::Ok) return BarrierOutcome::NumericalFailure;
        const double gap = nu / t;
        if (stop_when && stop_when(z, gap)) return BarrierOutcome::StoppedEarly;
        if (gap <= gap_tol * std::max(1.0, std::abs(bp.w.dot(z)))) return BarrierOutcome::Converged;
        t *= opt.barrier_growth;
    }
    return BarrierOutcome::NumericalFailure;
}

double frob(const MatrixXd& M) { return M.norm(); }

} // namespace

MatrixXd LmiConstraint::evaluate(const VectorXd& x) const
{
    MatrixXd F = F0;
    for (std::size_t i = 0; i < Fi.size(); ++i) F += x(static_cast<Eigen::Index>(i)) * Fi[i];
    return F;
}

double LmiConstraint::strictness_margin() const { return strict ? 1e-8 * (1.0 + frob(F0)) : 0.0; }

void LmiProblem::validate() const
{
    if (decision_dim <= 0) throw std::invalid_argument("LmiProblem: decision_dim must be positive");
    if (constraints.empty()) throw std::invalid_argument("LmiProblem: no constraints");
    if (objective && objective->size() != decision_dim)
        throw std::invalid_argument("LmiProblem: objective length mismatch");
    for (const auto& c : constraints) {
        const Eigen::Index s = c.F0.rows();
        if (s == 0 || c.F0.cols() != s) throw std::invalid_argument("LmiProblem: constraint F0 must be square");
        if (s > 16) throw std::invalid_argument("LmiProblem: block size above 16 unsupported");
        if (static_cast<int>(c.Fi.size()) != decision_dim)
            throw std::invalid_argument("LmiProblem: constraint '" + c.label + "' has wrong coefficient count");
        auto check = [&](const MatrixXd& M) {
            if (M.rows() != s || M.cols() != s) throw std::invalid_argument("LmiProblem: coefficient size mismatch");
            if ((M - M.transpose()).norm() > 1e-12 * (1.0 + M.norm()))
                throw std::invalid_argument("LmiProblem: coefficient matrix not symmetric in '" + c.label + "'");
        };
        check(c.F0);
        for (const auto& F : c.Fi) check(F);
    }
}

const char* to_string(SdpStatus s)
{
    switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Feasible: return "Feasible";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

double min_eigenvalue(const MatrixXd& M)
{
    if (M.rows() != M.cols() || M.rows() == 0) throw std::invalid_argument("min_eigenvalue: matrix must be square");
    if ((M - M.transpose()).norm() > 1e-12 * (1.0 + M.norm()))
        throw std::invalid_argument("min_eigenvalue: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

LmiConstraint from_affine(int decision_dim, const std::function<MatrixXd(const VectorXd&)>& map, bool strict,
                          std::string label)
{
    LmiConstraint c;
    VectorXd x = VectorXd::Zero(decision_dim);
    c.F0 = map(x);
    c.Fi.reserve(static_cast<std::size_t>(decision_dim));
    for (int i = 0; i < decision_dim; ++i) {
        x.setZero();
        x(i) = 1.0;
        MatrixXd Fi = map(x) - c.F0;
        c.Fi.push_back(0.5 * (Fi + Fi.transpose()));
    }
    c.F0 = 0.5 * (c.F0 + c.F0.transpose()).eval();
    c.strict = strict;
    c.label = std::move(label);
    return c;
}

MatrixXd SymmetricBasis::unpack(const VectorXd& x) const
{
    MatrixXd P(n_, n_);
    Eigen::Index k = offset_;
    for (Eigen::Index i = 0; i < n_; ++i)
        for (Eigen::Index j = i; j < n_; ++j, ++k) P(i, j) = P(j, i) = x(k);
    return P;
}

void SymmetricBasis::pack(const MatrixXd& P, VectorXd& x) const
{
    Eigen::Index k = offset_;
    for (Eigen::Index i = 0; i < n_; ++i)
        for (Eigen::Index j = i; j < n_; ++j, ++k) x(k) = 0.5 * (P(i, j) + P(j, i));
}

SdpSolution solve(const LmiProblem& problem, const SolverOptions& opt)
{
    problem.validate();
    const int m = problem.decision_dim;
    SdpSolution sol;
    sol.x = VectorXd::Zero(m);

    // Linear independence of the coefficient maps; a rank-deficient map has no unique Newton system.
    {
        Eigen::Index rows = 0;
        for (const auto& c : problem.constraints) rows += c.size() * c.size();
        MatrixXd V(rows, m);
        Eigen::Index r = 0;
        for (const auto& c : problem.constraints) {
            const Eigen::Index s2 = c.size() * c.size();
            for (int i = 0; i < m; ++i)
                V.block(r, i, s2, 1) = Eigen::Map<const VectorXd>(c.Fi[static_cast<std::size_t>(i)].data(), s2);
            r += s2;
        }
        Eigen::JacobiSVD<MatrixXd> svd(V);
        const auto sv = svd.singularValues();
        if (sv.size() < m || sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > opt.max_condition) return sol;
    }

    std::vector<double> margins;
    for (const auto& c : problem.constraints) margins.push_back(c.strictness_margin());

    auto make_blocks = [&](bool with_slack) {
        std::vector<BarrierProblem::Block> blocks;
        for (std::size_t j = 0; j < problem.constraints.size(); ++j) {
            const auto& c = problem.constraints[j];
            BarrierProblem::Block b;
            b.H0 = c.F0 - margins[j] * MatrixXd::Identity(c.size(), c.size());
            b.H = c.Fi;
            if (with_slack) b.H.push_back(MatrixXd::Identity(c.size(), c.size()));
            blocks.push_back(std::move(b));
        }
        return blocks;
    };
    auto box_rows = [&](Eigen::Index q, MatrixXd& A, VectorXd& r) {
        A = MatrixXd::Zero(2 * m, q);
        r = VectorXd::Constant(2 * m, opt.box_radius);
        for (int i = 0; i < m; ++i) {
            A(2 * i, i) = -1.0;
            A(2 * i + 1, i) = 1.0;
        }
    };

    // Phase I: minimize s subject to G_j(x) + s I > 0, s > -1.
    BarrierProblem p1;
    p1.dim = m + 1;
    p1.blocks = make_blocks(true);
    box_rows(p1.dim, p1.lin_a, p1.lin_r);
    p1.lin_a.conservativeResize(2 * m + 1, Eigen::NoChange);
    p1.lin_r.conservativeResize(2 * m + 1);
    p1.lin_a.row(2 * m).setZero();
    p1.lin_a(2 * m, m) = 1.0;
    p1.lin_r(2 * m) = 1.0;
    p1.w = VectorXd::Zero(m + 1);
    p1.w(m) = 1.0;

    double s0 = 0.0;
    for (const auto& b : p1.blocks) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(b.H0, Eigen::EigenvaluesOnly);
        s0 = std::max(s0, -es.eigenvalues()(0));
    }
    VectorXd z = VectorXd::Zero(m + 1);
    z(m) = s0 + 1.0;

    int steps = 0;
    // Stop once feasibility is decided: s < 0 with a margin close to the best available, or s* > 0 certified.
    const auto outcome1 = run_barrier(p1, z, opt, steps, 1e-11, [m](const VectorXd& zz, double gap) {
        const double s = zz(m);
        return s - gap > 0.0 || s < -0.999 || (s < 0.0 && gap < 0.1 * -s);
    });
    sol.newton_steps = steps;
    if (outcome1 == BarrierOutcome::NumericalFailure) return sol;
    const double s_final = z(m);
    if (!(s_final < 0.0)) {
        sol.status = SdpStatus::Infeasible;
        sol.x = z.head(m);
        return sol;
    }
    VectorXd x = z.head(m);

    SdpStatus status = SdpStatus::Feasible;
    if (problem.objective) {
        BarrierProblem p2;
        p2.dim = m;
        p2.blocks = make_blocks(false);
        box_rows(m, p2.lin_a, p2.lin_r);
        p2.w = *problem.objective;
        const auto outcome2 = run_barrier(p2, x, opt, steps, opt.gap_tolerance, nullptr);
        sol.newton_steps = steps;
        if (outcome2 == BarrierOutcome::NumericalFailure) {
            sol.x = x;
            return sol;
        }
        if ((x.array().abs() > 0.99 * opt.box_radius).any()) {
            sol.x = x;
            return sol; // objective unbounded within the search box
        }
        status = SdpStatus::Optimal;
        sol.objective = p2.w.dot(x);
    }

    // Independent a-posteriori check of every constraint at the returned point.
    sol.x = x;
    for (std::size_t j = 0; j < problem.constraints.size(); ++j) {
        const auto& c = problem.constraints[j];
        MatrixXd F = c.evaluate(x);
        F = 0.5 * (F + F.transpose()).eval();
        const double lam = min_eigenvalue(F);
        sol.min_eigs.push_back(lam);
        const double required = c.strict ? margins[j] : -1e-12 * (1.0 + c.F0.norm());
        if (lam < required) {
            sol.status = SdpStatus::NumericalFailure;
            return sol;
        }
    }
    sol.status = status;
    return sol;
}

} // namespace gpbound::sdp
