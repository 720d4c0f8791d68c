#include <doctest.h>

#include <cmath>

#include "gpbound/adaptive_controller.hpp"
#include "gpbound/derl.hpp"
#include "gpbound/sim/integrator.hpp"
#include "gpbound/sim/plants.hpp"
#include "gpbound/sim/scenario.hpp"

using namespace gpbound;

namespace {

PlantModel affine_plant(double a0, double b0, double e0)
{
    PlantModel p;
    p.a = [a0](double, double) { return a0; };
    p.b = [b0](double, double) { return b0; };
    p.e = [e0](double, double) { return e0; };
    p.z_f = [](const VectorXd& z) { return z(0); };
    return p;
}

} // namespace

TEST_CASE("control_input substitution")
{
    const auto p = affine_plant(0, 1, 1);
    CHECK(control_input(0.5, 1.0, 0.0, 1.5, 0.5, p, 1.0, 0.0) == doctest::Approx(-1.5));
}

TEST_CASE("perfect cancellation leaves the output at rest")
{
    const auto p = sim::cubic_demo_plant();
    const double y = 2.3, z = 1.7;
    const double u = control_input(y, y, 0.0, 1.2, z - 1.2, p, 10.0, 0.0);
    CHECK(p.rhs(y, 0.0, u, z) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("singular input gain")
{
    const auto p = sim::cubic_demo_plant();
    CHECK_THROWS_AS(control_input(0.0, 1.0, 0.0, 0.0, 0.0, p, 1.0, 0.0), SingularInputGain);
}

TEST_CASE("zero estimate reduces to the plain adaptive law bit for bit")
{
    const auto p = sim::cubic_demo_plant();
    for (double y : {1.1, 2.5, 7.9}) {
        const double y_r = y + 0.03, ydot = 0.4, zb = -0.8, kp = 10.0;
        const double plain = (ydot + kp * (y_r - y) - p.a(y, 0) - p.e(y, 0) * zb) / p.b(y, 0);
        CHECK(control_input(y, y_r, ydot, zb, 0.0, p, kp, 0.0) == plain);
    }
}

TEST_CASE("update_zbar")
{
    const ControllerState s(0.3, 10.0, 20.0);
    CHECK(update_zbar(s, 0.0, 5.0, 1e-3).z_bar == 0.3);
    CHECK(update_zbar(ControllerState(0.0, 10.0, 20.0), 1.0, 1.0, 1e-3).z_bar == doctest::Approx(-0.02));
    CHECK_THROWS_AS(update_zbar(s, 1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ControllerState(0.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ControllerState(0.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("closed loop reproduces the error dynamics")
{
    const auto p = sim::cubic_demo_plant();
    const double kp = 10, ki = 20, h = 1e-4;
    auto y_r = [](double t) { return 4.0 + std::sin(t); };
    auto ydot_r = [](double t) { return std::cos(t); };
    auto z = [](double t) { return 0.5 * std::sin(0.7 * t); };
    auto zdot = [](double t) { return 0.35 * std::cos(0.7 * t); };
    auto zhat = [](double t) { return 0.2 * std::cos(0.3 * t); };
    auto zhatdot = [](double t) { return -0.06 * std::sin(0.3 * t); };

    auto raw = [&](double t, const Vector2d& s) -> Vector2d {
        const double u = control_input(s(0), y_r(t), ydot_r(t), s(1), zhat(t), p, kp, t);
        return {p.rhs(s(0), t, u, z(t)), zbar_rate(ki, p.e(s(0), t), y_r(t) - s(0))};
    };
    auto err = [&](double t, const Vector2d& x) -> Vector2d {
        const double e_bar = p.e(y_r(t) - x(0), t);
        return error_dynamics_rhs(ErrorState<double>{x(0), x(1)}, e_bar, zhatdot(t) - zdot(t), kp, ki).vec();
    };
    Vector2d s(4.05, 0.1);
    Vector2d x(y_r(0) - s(0), zhat(0) - z(0) + s(1));
    double worst = 0;
    for (int k = 0; k < 20000; ++k) {
        const double t = k * h;
        s = sim::rk4_step(raw, s, t, h);
        x = sim::rk4_step(err, x, t, h);
        const Vector2d mapped(y_r(t + h) - s(0), zhat(t + h) - z(t + h) + s(1));
        worst = std::max(worst, (mapped - x).norm() / (1e-3 + x.norm()));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("constant disturbance: e_y -> 0 and z_bar -> c")
{
    sim::ScenarioConfig cfg;
    cfg.plant = sim::cubic_demo_plant();
    cfg.K_P = 10;
    cfg.K_I = 20;
    cfg.mode = sim::ControllerMode::Continuous;
    cfg.reference = {sim::SignalKind::Constant, 3.0};
    cfg.zeta = {sim::SignalKind::Constant, 0.8};
    cfg.y0 = 3.05;
    cfg.z_bar0 = 0.0;
    cfg.duration = 30;
    const auto m = sim::run_scenario(cfg);
    CHECK(std::abs(m.time_series.e_y.back()) < 1e-8);
    CHECK(m.time_series.z_bar.back() == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("gain band extremization")
{
    const auto band = extremize_gain(sim::cubic_demo_plant(), {1.0, 10.0});
    CHECK(band.e_minus == 1.0);
    CHECK(band.e_plus == 10.0);
    const auto flat = extremize_gain(affine_plant(0, 1, 2.5), {0.0, 4.0});
    CHECK(flat.degenerate());
    const auto pn = extremize_gain(sim::pneumatic_model(sim::PneumaticPlant{}), {1.0, 3.0});
    CHECK(pn.e_plus == doctest::Approx(-0.0665359).epsilon(3e-3));
    CHECK(pn.e_minus == doctest::Approx(-0.1152444).epsilon(3e-3));
}

TEST_CASE("derive_bound_config")
{
    const auto bc = derive_bound_config(sim::cubic_demo_plant(), {1.11, 9.89}, 0.11, 10.0, 20.0, 0.2);
    CHECK(bc.gain_band.e_minus == doctest::Approx(1.0));
    CHECK(bc.gain_band.e_plus == doctest::Approx(10.0));
    CHECK(bc.gamma == doctest::Approx(0.2653).epsilon(0.05));
    CHECK(bc.z_lim == doctest::Approx(compute_zlim(0.11, bc.gamma, 0.2)));

    const auto flat = derive_bound_config(affine_plant(0, 1, 2.0), {0.0, 1.0}, 0.1, 10.0, 20.0, 0.0);
    CHECK(flat.gain_band.degenerate());
    CHECK(flat.certificate.polytope.vertices[0] == flat.certificate.polytope.vertices[1]);

    PlantModel zero_crossing = affine_plant(0, 1, 0);
    zero_crossing.e = [](double y, double) { return y; };
    CHECK_THROWS_AS(derive_bound_config(zero_crossing, {-1.0, 1.0}, 0.1, 10.0, 20.0, 0.0), CertificationError);
    CHECK_THROWS_AS(derive_bound_config(zero_crossing, {1.0, 2.0}, 0.0, 10.0, 20.0, 0.0), std::invalid_argument);
}

TEST_CASE("output and parameter-error envelopes from a non-zero initial state")
{
    sim::ScenarioConfig cfg;
    cfg.plant = sim::cubic_demo_plant();
    cfg.K_P = 10;
    cfg.K_I = 20;
    cfg.mode = sim::ControllerMode::Continuous;
    cfg.reference = {sim::SignalKind::UniformSteps, 0, 1.5, 9.0, 0.9, 1e-3};
    cfg.zeta = {sim::SignalKind::GaussianRamp, 0, 0, 0, 3.0, 0, 100.0, 0.2};
    cfg.estimate = sim::SignalSpec{sim::SignalKind::GaussianRamp, 0, 0, 0, 3.0, 0, 100.0, 0.2};
    cfg.seed = 12;
    cfg.duration = 30;
    cfg.bound_config = derive_bound_config(cfg.plant, {1.11, 9.89}, 0.11, 10.0, 20.0, 0.0);
    const auto probe = sim::run_scenario(cfg);
    cfg.y0 = probe.time_series.y_r[0] - 0.04;
    cfg.z_bar0 = 0.3;
    const auto m = sim::run_scenario(cfg);
    const auto& s = m.time_series;
    const Vector2d x0(s.e_y[0], s.z_hat[0] - s.z[0] + s.z_bar[0]);
    TrajectoryBound ty{cfg.bound_config->certificate, x0, m.zdot_e_inf, Vector2d(1, 0)};
    TrajectoryBound tz{cfg.bound_config->certificate, x0, m.zdot_e_inf, Vector2d(0, 1)};
    long bad_y = 0, bad_z = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double e_z = s.z_hat[k] - s.z[k] + s.z_bar[k];
        if (std::abs(s.e_y[k]) > bound_output_trajectory(ty, s.t[k])) ++bad_y;
        if (std::abs(e_z) > bound_output_trajectory(tz, s.t[k])) ++bad_z;
    }
    CHECK(bad_y == 0);
    CHECK(bad_z == 0);
    CHECK(m.envelope_violations == 0);
}
