#include "gpbound/sim/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <variant>

#include "gpbound/derl.hpp"
#include "gpbound/gpsol.hpp"
#include "gpbound/sim/integrator.hpp"
#include "gpbound/sim/signals.hpp"

namespace gpbound::sim {

namespace {

// Absolute slack on error magnitudes in the bound checks; covers integration error.
constexpr double kErrorSlack = 1e-6;

class Signal {
public:
    Signal(const SignalSpec& spec, std::uint64_t seed, std::uint64_t stream, double duration)
    {
        auto rng = make_rng(seed, stream);
        switch (spec.kind) {
        case SignalKind::Constant: sig_ = FilteredSteps::constant(spec.value); break;
        case SignalKind::UniformSteps:
            sig_ = FilteredSteps::uniform(rng, spec.lo, spec.hi, spec.hold, spec.t1, duration);
            break;
        case SignalKind::GaussianRamp:
            sig_ = GaussianRamp(rng, spec.sigma, spec.hold, spec.rate, duration, spec.value);
            break;
        }
    }

    double value(double t, double anchor) const
    {
        return std::visit([=](const auto& s) { return s.value(t, anchor); }, sig_);
    }
    double rate(double t, double anchor) const
    {
        return std::visit([=](const auto& s) { return s.rate(t, anchor); }, sig_);
    }
    double value(double t) const { return value(t, t); }
    double rate(double t) const { return rate(t, t); }

private:
    std::variant<FilteredSteps, GaussianRamp> sig_;
};

constexpr std::uint64_t kReferenceStream = 1;
constexpr std::uint64_t kZetaStream = 2;
constexpr std::uint64_t kEstimateStream = 3;

// Per-sample bookkeeping shared by both controller modes.
class Recorder {
public:
    explicit Recorder(const ScenarioConfig& cfg) : cfg_(cfg)
    {
        if (cfg.record_series) out_.time_series.reserve(static_cast<std::size_t>(cfg.duration / cfg.T_s) + 2);
    }

    void sample(double t, double y, double y_r, double u, double z, double z_tilde, double z_hat, double z_bar)
    {
        const double e_y = y_r - y;
        const double z_e = z_hat - z;
        const double e_z = z_e + z_bar;
        if (out_.samples > 0) out_.zdot_e_inf = std::max(out_.zdot_e_inf, std::abs(z_e - prev_z_e_) / cfg_.T_s);
        prev_z_e_ = z_e;
        ++out_.samples;

        const double a = std::abs(e_y);
        out_.e_y_inf = std::max(out_.e_y_inf, a);
        out_.cae += a * cfg_.T_s;
        if (t < cfg_.early_window) out_.early_cae += a * cfg_.T_s;

        double V = std::numeric_limits<double>::quiet_NaN();
        if (cfg_.bound_config) {
            const auto& bc = *cfg_.bound_config;
            if (a > bc.gamma * out_.zdot_e_inf * (1.0 + 1e-9) + kErrorSlack) ++out_.bound_violations;
            V = bc.certificate.lyapunov(Vector2d(e_y, e_z));
            t_.push_back(t);
            V_.push_back(V);
        }
        if (cfg_.record_series) {
            auto& s = out_.time_series;
            s.t.push_back(t);
            s.y.push_back(y);
            s.y_r.push_back(y_r);
            s.u.push_back(u);
            s.z.push_back(z);
            s.z_tilde.push_back(z_tilde);
            s.z_hat.push_back(z_hat);
            s.z_bar.push_back(z_bar);
            s.e_y.push_back(e_y);
            s.V.push_back(V);
        }
    }

    RunMetrics& metrics() { return out_; }

    RunMetrics finish()
    {
        if (cfg_.bound_config && !V_.empty()) {
            const auto& cert = cfg_.bound_config->certificate;
            const double floor_term = out_.zdot_e_inf * out_.zdot_e_inf / cert.delta;
            const double v_slack = 2.0 * cert.P.norm() * kErrorSlack * kErrorSlack;
            for (std::size_t k = 0; k < V_.size(); ++k) {
                const double env = std::exp(-cert.delta * t_[k]) * V_[0] + floor_term;
                if (V_[k] > env * (1.0 + 1e-9) + v_slack) ++out_.envelope_violations;
                if (env > 0) out_.envelope_ratio = std::max(out_.envelope_ratio, V_[k] / env);
            }
        }
        return std::move(out_);
    }

private:
    const ScenarioConfig& cfg_;
    RunMetrics out_;
    double prev_z_e_ = 0.0;
    std::vector<double> t_, V_;
};

std::size_t sample_count(const ScenarioConfig& cfg)
{
    return static_cast<std::size_t>(std::floor(cfg.duration / cfg.T_s + 1e-9)) + 1;
}

VectorXd as_vec(double v) { return VectorXd::Constant(1, v); }

RunMetrics run_continuous(const ScenarioConfig& cfg)
{
    const Signal ref(cfg.reference, cfg.seed, kReferenceStream, cfg.duration);
    const Signal zeta(cfg.zeta, cfg.seed, kZetaStream, cfg.duration);
    std::optional<Signal> est;
    if (cfg.estimate) est.emplace(*cfg.estimate, cfg.seed, kEstimateStream, cfg.duration);

    const auto& plant = cfg.plant;
    auto z_at = [&](double t, double anchor) { return plant.z_f(as_vec(zeta.value(t, anchor))); };
    auto zhat_at = [&](double t, double anchor) { return est ? est->value(t, anchor) : 0.0; };

    double anchor = 0.0; // midpoint of the current RK4 step
    auto rhs = [&](double t, const Vector2d& x) -> Vector2d {
        const double y_r = ref.value(t, anchor);
        const double u = control_input(x(0), y_r, ref.rate(t, anchor), x(1), zhat_at(t, anchor), plant, cfg.K_P, t);
        return {plant.rhs(x(0), t, u, z_at(t, anchor)), zbar_rate(cfg.K_I, plant.e(x(0), t), y_r - x(0))};
    };

    Vector2d x(cfg.y0.value_or(ref.value(0.0)), cfg.z_bar0.value_or(z_at(0.0, 0.0) - zhat_at(0.0, 0.0)));
    Recorder rec(cfg);
    const std::size_t n = sample_count(cfg);
    const double h = cfg.T_s / cfg.substeps;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * cfg.T_s;
        const double y_r = ref.value(t);
        const double zh = zhat_at(t, t);
        const double u = control_input(x(0), y_r, ref.rate(t), x(1), zh, plant, cfg.K_P, t);
        rec.sample(t, x(0), y_r, u, z_at(t, t), zh, zh, x(1));
        if (k + 1 == n) break;
        for (int s = 0; s < cfg.substeps; ++s) {
            anchor = t + (s + 0.5) * h;
            x = rk4_step(rhs, x, t + s * h, h);
        }
    }
    return rec.finish();
}

RunMetrics run_discrete(const ScenarioConfig& cfg)
{
    const Signal ref(cfg.reference, cfg.seed, kReferenceStream, cfg.duration);
    const Signal zeta(cfg.zeta, cfg.seed, kZetaStream, cfg.duration);
    std::optional<Signal> est;
    if (cfg.estimate && !cfg.gpsol_on) est.emplace(*cfg.estimate, cfg.seed, kEstimateStream, cfg.duration);

    const auto& plant = cfg.plant;
    auto z_at = [&](double t) { return plant.z_f(as_vec(zeta.value(t))); };

    double y = cfg.y0.value_or(ref.value(0.0));
    std::optional<LearnerState> learner;
    if (cfg.gpsol_on) {
        const auto& g = cfg.gpsol;
        learner = LearnerState::create(init_grid(g.bounds, g.n1, g.sigma_K, g.length_scale, g.sigma_r), y, g.R_meas,
                                       g.Q_x, g.R_meas);
    }
    auto predict = [&](double t) -> GpPrediction {
        if (learner) return gp_predict(learner->gp, as_vec(zeta.value(t)));
        return {est ? est->value(t) : 0.0, 0.0, false};
    };

    const GpPrediction first = predict(0.0);
    double z_bar = cfg.z_bar0.value_or(z_at(0.0) - first.mean);
    DerlState derl;
    if (cfg.derl_on) derl = DerlState::from_sigma_factor(cfg.z_lim, cfg.sigma_fac, cfg.T_s, first.mean);

    const double sr2 = cfg.gpsol.sigma_r * cfg.gpsol.sigma_r;
    const double sk2 = cfg.gpsol.sigma_K * cfg.gpsol.sigma_K;
    Recorder rec(cfg);
    auto& m = rec.metrics();
    const std::size_t n = sample_count(cfg);
    const double h = cfg.T_s / cfg.substeps;
    double u_prev = 0.0, var_prev = first.var;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * cfg.T_s;
        if (learner && k > 0) {
            const double t_prev = t - cfg.T_s;
            *learner = learner_step(*learner, y, u_prev, as_vec(zeta.value(t_prev)), plant, cfg.T_s, t_prev);
            const VectorXd d = learner->gp.C.diagonal();
            if (d.minCoeff() < sr2 * (1.0 - 1e-12) || d.maxCoeff() > sk2 * (1.0 + 1e-12)) ++m.clamp_violations;
        }
        const GpPrediction pred = k == 0 ? first : predict(t);
        double z_hat = pred.mean;
        if (cfg.derl_on && k > 0) {
            const auto out = derl_step(derl, pred.mean, pred.var, var_prev);
            z_hat = out.z_hat;
            ++(out.branch == DerlBranch::Probabilistic ? m.derl_probabilistic : m.derl_deterministic);
        }
        var_prev = pred.var;

        const double y_r = ref.value(t);
        const double e_y = y_r - y;
        const double u = control_input(y, y_r, ref.rate(t), z_bar, z_hat, plant, cfg.K_P, t);
        rec.sample(t, y, y_r, u, z_at(t), pred.mean, z_hat, z_bar);
        if (k + 1 == n) break;

        const double e_gain = plant.e(y, t);
        if (cfg.pneumatic) {
            const auto& pn = *cfg.pneumatic;
            const double u_C = pn.inlet_voltage(y, u);
            const double mid = t + 0.5 * cfg.T_s;
            auto f = [&](double tau, double p) { return pneumatic_rhs(p, u_C, zeta.value(tau, mid), pn); };
            for (int s = 0; s < cfg.substeps; ++s) y = rk4_step(f, y, t + s * h, h);
        } else {
            const double mid = t + 0.5 * cfg.T_s;
            auto f = [&](double tau, double yy) { return plant.rhs(yy, tau, u, plant.z_f(as_vec(zeta.value(tau, mid)))); };
            for (int s = 0; s < cfg.substeps; ++s) y = rk4_step(f, y, t + s * h, h);
        }
        z_bar += cfg.T_s * zbar_rate(cfg.K_I, e_gain, e_y);
        u_prev = u;
    }
    return rec.finish();
}

} // namespace

void ScenarioConfig::validate() const
{
    if (!(duration > 0)) throw std::invalid_argument("ScenarioConfig: duration must be positive");
    if (!(T_s > 0)) throw std::invalid_argument("ScenarioConfig: T_s must be positive");
    if (substeps < 1) throw std::invalid_argument("ScenarioConfig: substeps must be at least 1");
    if (!(K_P > 0) || !(K_I > 0)) throw std::invalid_argument("ScenarioConfig: gains must be positive");
    if (!plant.a || !plant.b || !plant.e || !plant.z_f) throw std::invalid_argument("ScenarioConfig: plant callbacks missing");
    if (derl_on && !(z_lim >= 0)) throw std::invalid_argument("ScenarioConfig: z_lim must be non-negative");
    if (mode == ControllerMode::Continuous && (gpsol_on || derl_on))
        throw std::invalid_argument("ScenarioConfig: gpsol/derl require the discrete controller");
    if (pneumatic) pneumatic->validate();
}

void TimeSeries::reserve(std::size_t n)
{
    for (auto* v : {&t, &y, &y_r, &u, &z, &z_tilde, &z_hat, &z_bar, &e_y, &V}) v->reserve(n);
}

void TimeSeries::write_csv(std::ostream& os) const
{
    os << "t, y, y_r, u, z, z_tilde, z_hat, z_bar, e_y, V\n";
    char buf[64];
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double row[] = {t[k], y[k], y_r[k], u[k], z[k], z_tilde[k], z_hat[k], z_bar[k], e_y[k], V[k]};
        for (std::size_t j = 0; j < 10; ++j) {
            std::snprintf(buf, sizeof buf, "%.10g", row[j]);
            os << buf << (j + 1 < 10 ? ", " : "\n");
        }
    }
}

RunMetrics run_scenario(const ScenarioConfig& cfg)
{
    cfg.validate();
    return cfg.mode == ControllerMode::Continuous ? run_continuous(cfg) : run_discrete(cfg);
}

} // namespace gpbound::sim
