#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace gpbound::sim {

class IntegrationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline bool finite(double v) { return std::isfinite(v); }
template <typename Derived>
bool finite(const Eigen::MatrixBase<Derived>& v)
{
    return v.allFinite();
}
} // namespace detail

// Classical fourth-order Runge-Kutta step for xdot = rhs(t, x).
template <typename State, typename Rhs>
State rk4_step(Rhs&& rhs, const State& x, double t, double dt)
{
    if (!(dt > 0)) throw std::invalid_argument("rk4_step: dt must be positive");
    const State k1 = rhs(t, x);
    const State k2 = rhs(t + 0.5 * dt, State(x + 0.5 * dt * k1));
    const State k3 = rhs(t + 0.5 * dt, State(x + 0.5 * dt * k2));
    const State k4 = rhs(t + dt, State(x + dt * k3));
    if (!detail::finite(k1) || !detail::finite(k2) || !detail::finite(k3) || !detail::finite(k4))
        throw IntegrationFailure("rk4_step: non-finite derivative");
    return State(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

} // namespace gpbound::sim
