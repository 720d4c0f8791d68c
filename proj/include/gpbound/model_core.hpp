#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpbound/types.hpp"

namespace gpbound {

// First-order input-affine plant  ydot = a(y,t) + b(y,t) u + e(y,t) z,
// with hidden disturbance z = z_f(zeta) over a bounded input box.
struct PlantModel {
    std::function<double(double, double)> a;
    std::function<double(double, double)> b;
    std::function<double(double, double)> e;
    std::function<double(const VectorXd&)> z_f;
    std::function<VectorXd(double)> zeta_of_t;
    VectorXd zeta_lo;
    VectorXd zeta_hi;

    double rhs(double y, double t, double u, double z) const { return a(y, t) + b(y, t) * u + e(y, t) * z; }

    bool in_box(const VectorXd& zeta) const
    {
        if (zeta_lo.size() == 0) return true;
        return (zeta.array() >= zeta_lo.array()).all() && (zeta.array() <= zeta_hi.array()).all();
    }
};

// x = [e_y, e_z]: tracking error and combined estimation error.
template <typename Scalar = double>
struct ErrorState {
    Scalar e_y{0};
    Scalar e_z{0};

    Eigen::Matrix<Scalar, 2, 1> vec() const { return {e_y, e_z}; }
};

struct GainBand {
    double e_minus;
    double e_plus;

    GainBand(double lo, double hi) : e_minus(lo), e_plus(hi)
    {
        if (!(lo <= hi)) throw std::invalid_argument("GainBand: e_minus must not exceed e_plus");
    }

    // A band touching zero admits a vertex with no coupling between e_y and e_z.
    bool contains_zero() const { return e_minus <= 0.0 && e_plus >= 0.0; }
    bool degenerate() const { return e_minus == e_plus; }
};

// Quasi-linear system xdot = A(x,t) x + b u, y = c'x with A(x,t) in conv{A_l}.
template <typename Scalar = double>
struct PolytopeModel {
    std::vector<MatrixX<Scalar>> vertices;
    VectorX<Scalar> b_in;
    VectorX<Scalar> c_out;

    PolytopeModel() = default;
    PolytopeModel(std::vector<MatrixX<Scalar>> verts, VectorX<Scalar> b, VectorX<Scalar> c)
        : vertices(std::move(verts)), b_in(std::move(b)), c_out(std::move(c))
    {
        validate();
    }

    Eigen::Index dim() const { return b_in.size(); }
    std::size_t size() const { return vertices.size(); }

    void validate() const
    {
        if (vertices.empty()) throw std::invalid_argument("PolytopeModel: vertex list is empty");
        const Eigen::Index n = b_in.size();
        if (n == 0 || c_out.size() != n) throw std::invalid_argument("PolytopeModel: b_in/c_out length mismatch");
        for (const auto& A : vertices) {
            if (A.rows() != n || A.cols() != n) throw std::invalid_argument("PolytopeModel: vertex dimension mismatch");
        }
    }
};

using Polytope = PolytopeModel<double>;

template <typename Scalar>
PolytopeModel<Scalar> build_error_polytope(Scalar k_p, Scalar k_i, const GainBand& band)
{
    if (!(k_p > 0) || !(k_i > 0)) throw std::invalid_argument("build_error_polytope: gains must be positive");
    auto vertex = [&](Scalar e) {
        MatrixX<Scalar> A(2, 2);
        A << -k_p, e, -k_i * e, Scalar(0);
        return A;
    };
    VectorX<Scalar> b(2), c(2);
    b << 0, 1;
    c << 1, 0;
    return PolytopeModel<Scalar>({vertex(Scalar(band.e_plus)), vertex(Scalar(band.e_minus))}, b, c);
}

// Time derivative of the controlled error system for the current gain e_bar and input v = dz_e/dt.
template <typename Scalar>
ErrorState<Scalar> error_dynamics_rhs(const ErrorState<Scalar>& x, Scalar e_bar, Scalar v, Scalar k_p, Scalar k_i)
{
    return {-k_p * x.e_y + e_bar * x.e_z, -k_i * e_bar * x.e_y + v};
}

template <typename Scalar, typename Derived>
MatrixX<Scalar> convex_member(const PolytopeModel<Scalar>& poly, const Eigen::MatrixBase<Derived>& weights)
{
    if (static_cast<std::size_t>(weights.size()) != poly.size())
        throw std::invalid_argument("convex_member: weight count does not match vertex count");
    if ((weights.array() < Scalar(0)).any()) throw std::invalid_argument("convex_member: negative weight");
    using std::abs;
    if (abs(weights.sum() - Scalar(1)) > Scalar(1e-12)) throw std::invalid_argument("convex_member: weights must sum to one");
    MatrixX<Scalar> A = MatrixX<Scalar>::Zero(poly.dim(), poly.dim());
    for (std::size_t l = 0; l < poly.size(); ++l) A += weights(static_cast<Eigen::Index>(l)) * poly.vertices[l];
    return A;
}

// Largest real part among the eigenvalues of A.
inline double spectral_abscissa(const MatrixXd& A)
{
    Eigen::EigenSolver<MatrixXd> es(A, false);
    return es.eigenvalues().real().maxCoeff();
}

// Detects 2x2 error polytopes whose (0,0) entries differ across vertices, which no single K_P can produce.
inline std::vector<std::string> polytope_warnings(const Polytope& poly)
{
    std::vector<std::string> out;
    if (poly.dim() == 2 && poly.size() > 1) {
        const double first = poly.vertices.front()(0, 0);
        for (const auto& A : poly.vertices) {
            if (std::abs(A(0, 0) - first) > 1e-12 * (1.0 + std::abs(first))) {
                out.emplace_back("vertex (1,1) entries differ across vertices; not generated by a single shared K_P");
                break;
            }
        }
    }
    for (std::size_t l = 0; l < poly.size(); ++l) {
        if (spectral_abscissa(poly.vertices[l]) >= 0.0)
            out.emplace_back("vertex " + std::to_string(l + 1) + " is not Hurwitz");
    }
    return out;
}

} // namespace gpbound
