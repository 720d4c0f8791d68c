#include "gpbound/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gpbound/derl.hpp"
#include "gpbound/gpsol.hpp"
#include "gpbound/sim/integrator.hpp"

namespace gpbound::cli {

namespace {

json matrix_json(const MatrixXd& M)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const VectorXd& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json polytope_json(const Polytope& poly)
{
    json verts = json::array();
    for (const auto& A : poly.vertices) verts.push_back(matrix_json(A));
    return {{"vertices", verts}, {"b", vector_json(poly.b_in)}, {"c", vector_json(poly.c_out)}};
}

int exit_for(SdpStatus s) { return s == SdpStatus::NumericalFailure ? kNumerical : kInfeasible; }

// Maps exceptions from any stage onto the exit-code contract.
template <typename F>
int guarded(std::ostream& err, F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const CertificationError& e) {
        err << "certification failed: " << e.what() << '\n';
        return exit_for(e.status());
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const sim::IntegrationFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const SingularInputGain& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::domain_error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace

void write_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

Polytope config_polytope(const EffectiveConfig& cfg, std::optional<GainBand>* band_out)
{
    if (cfg.polytope) return *cfg.polytope;
    const auto& c = cfg.cert;
    std::optional<GainBand> band = c.gain_band;
    if (!band) {
        if (!c.y_r_range) throw ConfigError("certification needs plant vertices, a gain_band, or y_r_range with e_y_lim");
        band = extremize_gain(cfg.scenario.plant, {c.y_r_range->first - *c.e_y_lim, c.y_r_range->second + *c.e_y_lim});
    }
    if (band_out) *band_out = band;
    return build_error_polytope(cfg.scenario.K_P, cfg.scenario.K_I, *band);
}

std::optional<BoundConfig> config_bound(const EffectiveConfig& cfg)
{
    const auto& c = cfg.cert;
    if (!c.gain_band && !c.y_r_range) return std::nullopt;
    std::optional<GainBand> band;
    const Polytope poly = config_polytope(cfg, &band);
    BisectionOptions opts{c.tol, c.grid_points};
    auto res = c.delta_range ? bisect_delta(poly, *c.delta_range, opts) : bisect_delta(poly, opts);
    if (!res.ok()) throw CertificationError(res.status, "no certificate for the configured error polytope");
    BoundConfig bc;
    if (c.y_r_range) bc.y_r_range = *c.y_r_range;
    bc.e_y_lim = c.e_y_lim.value_or(0.0);
    bc.gain_band = *band;
    bc.certificate = *res.certificate;
    bc.gamma = bc.certificate.gamma;
    bc.zdot_inf = c.zdot_inf;
    bc.z_lim = c.e_y_lim ? compute_zlim(*c.e_y_lim, bc.gamma, c.zdot_inf) : 0.0;
    return bc;
}

json certify_report(const EffectiveConfig& cfg, int& exit_code)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<GainBand> band;
    const Polytope poly = config_polytope(cfg, &band);
    const auto& c = cfg.cert;
    BisectionOptions opts{c.tol, c.grid_points};
    const auto range = c.delta_range.value_or(default_delta_bracket(poly));
    const auto res = bisect_delta(poly, range, opts);

    json report;
    report["status"] = sdp::to_string(res.status);
    report["polytope"] = polytope_json(poly);
    json warnings = json::array();
    for (const auto& w : polytope_warnings(poly)) warnings.push_back(w);
    report["warnings"] = warnings;
    if (band) report["gain_band"] = {band->e_minus, band->e_plus};
    report["lmi_solves"] = res.lmi_solves;
    if (res.ok()) {
        const auto& cert = *res.certificate;
        report["delta_star"] = cert.delta;
        report["gamma_bar"] = cert.gamma_bar;
        report["gamma"] = cert.gamma;
        report["P"] = matrix_json(cert.P);
        if (c.e_y_lim) report["z_lim"] = compute_zlim(*c.e_y_lim, cert.gamma, c.zdot_inf);
        exit_code = kOk;
    } else {
        report["delta_star"] = nullptr;
        report["gamma_bar"] = nullptr;
        report["gamma"] = nullptr;
        report["P"] = nullptr;
        exit_code = exit_for(res.status);
    }
    report["gamma_hinf"] = nullptr;
    if (c.hinf && res.ok()) {
        const auto h = compute_hinf_gain(poly);
        report["hinf_status"] = sdp::to_string(h.status);
        if (h.ok()) report["gamma_hinf"] = h.gamma_inf;
    }
    const sdp::SolverOptions so;
    report["tolerances"] = {{"delta_tol", c.tol},
                            {"grid_points", c.grid_points},
                            {"delta_range", {range.first, range.second}},
                            {"strictness_margin", "1e-8*(1+|F0|)"},
                            {"gap_tolerance", so.gap_tolerance},
                            {"max_condition", so.max_condition}};
    report["config"] = cfg.doc;
    report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

json metrics_json(const sim::RunMetrics& m, const std::optional<BoundConfig>& bound)
{
    json j = {{"e_y_inf", m.e_y_inf},
              {"cae", m.cae},
              {"early_cae", m.early_cae},
              {"zdot_e_inf", m.zdot_e_inf},
              {"bound_violations", m.bound_violations},
              {"envelope_violations", m.envelope_violations},
              {"envelope_ratio", m.envelope_ratio},
              {"clamp_violations", m.clamp_violations},
              {"derl_probabilistic_steps", m.derl_probabilistic},
              {"derl_deterministic_steps", m.derl_deterministic},
              {"samples", m.samples}};
    if (bound) {
        j["gamma"] = bound->gamma;
        j["delta"] = bound->certificate.delta;
        j["gain_band"] = {bound->gain_band.e_minus, bound->gain_band.e_plus};
        j["P"] = matrix_json(bound->certificate.P);
        j["z_lim"] = bound->z_lim;
        j["e_y_bound"] = bound->gamma * m.zdot_e_inf;
    }
    return j;
}

int cmd_certify(const std::string& config_path, const CertifyOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        json user = load_json(config_path);
        if (opts.tol) set_param(user, "certification.tol", *opts.tol);
        const auto cfg = resolve_config(user);
        int code = kOk;
        const json report = certify_report(cfg, code);
        const std::string text = dump(report);
        out << text;
        if (opts.out_dir) write_atomic((std::filesystem::path(*opts.out_dir) / "certificate.json").string(), text);
        if (code != kOk) err << "status " << report["status"].get<std::string>() << '\n';
        return code;
    });
}

namespace {

struct PreparedRun {
    EffectiveConfig cfg;
    std::optional<BoundConfig> bound;
};

PreparedRun prepare(const json& user)
{
    PreparedRun p{resolve_config(user), std::nullopt};
    if (p.cfg.polytope) throw ConfigError("a polytope plant can be certified but not simulated");
    p.bound = config_bound(p.cfg);
    p.cfg.scenario.bound_config = p.bound;
    if (p.cfg.scenario.derl_on && p.cfg.z_lim_from_bound) {
        if (!p.bound || !p.cfg.cert.e_y_lim) throw ConfigError("derl.z_lim not set and no certified bound to derive it from");
        p.cfg.scenario.z_lim = p.bound->z_lim;
    }
    return p;
}

} // namespace

int cmd_simulate(const std::string& config_path, const SimulateOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        json user = load_json(config_path);
        if (opts.seed) set_param(user, "scenario.seed", *opts.seed);
        auto run = prepare(user);
        const auto m = sim::run_scenario(run.cfg.scenario);
        json doc = {{"config", run.cfg.doc}, {"metrics", metrics_json(m, run.bound)}};
        if (run.cfg.scenario.derl_on) doc["metrics"]["z_lim_used"] = run.cfg.scenario.z_lim;
        const std::string text = dump(doc);
        if (opts.out_dir) {
            namespace fs = std::filesystem;
            write_atomic((fs::path(*opts.out_dir) / "metrics.json").string(), text);
            if (run.cfg.scenario.record_series) {
                std::ostringstream csv;
                m.time_series.write_csv(csv);
                write_atomic((fs::path(*opts.out_dir) / "series.csv").string(), csv.str());
            }
        }
        out << text;
        return kOk;
    });
}

int cmd_sweep(const std::string& config_path, const SweepOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        if (opts.values.empty()) throw ConfigError("--values must name at least one value");
        if (opts.runs < 1) throw ConfigError("--runs must be at least 1");
        json user = load_json(config_path);
        if (opts.seed) set_param(user, "scenario.seed", *opts.seed);
        std::ostringstream table;
        table << "param,value,runs,z_lim,mean_cae,mean_early_cae,mean_e_y_inf,baseline_cae,baseline_early_cae,"
                 "normalized_cae,normalized_early_cae\n";
        table << std::setprecision(10);
        for (const auto& raw : opts.values) {
            json value;
            try {
                value = json::parse(raw);
            } catch (const json::parse_error&) {
                value = raw;
            }
            json u = user;
            set_param(u, opts.param, value);
            auto run = prepare(u);
            const auto& s = run.cfg.scenario;
            const sim::AblationVariant variant{raw, s.gpsol_on, s.derl_on, std::nullopt};
            const auto t = sim::run_ablation_suite(s, {variant}, opts.runs);
            const auto& row = t.rows.front();
            table << opts.param << ',' << raw << ',' << opts.runs << ',' << (s.derl_on ? s.z_lim : 0.0) << ','
                  << row.mean_cae << ',' << row.mean_early_cae << ',' << row.mean_e_y_inf << ',' << t.baseline.mean_cae
                  << ',' << t.baseline.mean_early_cae << ',' << row.normalized_cae << ',' << row.normalized_early_cae
                  << '\n';
        }
        if (opts.out_dir) write_atomic((std::filesystem::path(*opts.out_dir) / "sweep.csv").string(), table.str());
        out << table.str();
        return kOk;
    });
}

} // namespace gpbound::cli
