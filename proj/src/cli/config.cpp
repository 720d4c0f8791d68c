#include "gpbound/cli/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

namespace gpbound::cli {

namespace {

const char* kSections[] = {"plant", "controller", "gpsol", "derl", "scenario", "certification"};

json signal_default()
{
    return {{"kind", "constant"}, {"value", 0.0}, {"lo", 0.0}, {"hi", 1.0}, {"hold", 1.0},
            {"t1", 0.0},          {"sigma", 0.0}, {"rate", nullptr}};
}

bool same_kind(const json& def, const json& val)
{
    if (def.is_null()) return true;
    if (def.is_number()) return val.is_number();
    if (def.is_boolean()) return val.is_boolean();
    if (def.is_string()) return val.is_string();
    if (def.is_array()) return val.is_array();
    if (def.is_object()) return val.is_object();
    return false;
}

json merge(const json& def, const json& user, const std::string& where)
{
    if (!user.is_object()) throw ConfigError(where + ": expected an object");
    json out = def;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = where.empty() ? it.key() : where + "." + it.key();
        if (!def.contains(it.key())) throw ConfigError("unknown key '" + key + "'");
        const json& d = def[it.key()];
        if (d.is_object()) {
            out[it.key()] = merge(d, it.value(), key);
        } else {
            if (!same_kind(d, it.value()) && !it.value().is_null())
                throw ConfigError("key '" + key + "' has the wrong type");
            out[it.key()] = it.value();
        }
    }
    return out;
}

template <typename T>
T get(const json& j, const char* key, const std::string& where)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + where + "." + key + "' is missing or has the wrong type");
    }
}

std::pair<double, double> get_pair(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError("'" + where + "' must be a two-element numeric array");
    return {j[0].get<double>(), j[1].get<double>()};
}

VectorXd get_vector(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty()) throw ConfigError("'" + where + "' must be a non-empty numeric array");
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError("'" + where + "' must be numeric");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

sim::SignalSpec parse_signal(const json& j, const std::string& where)
{
    sim::SignalSpec s;
    const auto kind = get<std::string>(j, "kind", where);
    if (kind == "constant") s.kind = sim::SignalKind::Constant;
    else if (kind == "uniform_steps") s.kind = sim::SignalKind::UniformSteps;
    else if (kind == "gaussian_ramp") s.kind = sim::SignalKind::GaussianRamp;
    else throw ConfigError("'" + where + ".kind' must be constant, uniform_steps or gaussian_ramp");
    s.value = get<double>(j, "value", where);
    s.lo = get<double>(j, "lo", where);
    s.hi = get<double>(j, "hi", where);
    s.hold = get<double>(j, "hold", where);
    s.t1 = get<double>(j, "t1", where);
    s.sigma = get<double>(j, "sigma", where);
    s.rate = j.at("rate").is_null() ? std::numeric_limits<double>::infinity() : get<double>(j, "rate", where);
    if (!(s.hold > 0)) throw ConfigError("'" + where + ".hold' must be positive");
    if (s.kind == sim::SignalKind::UniformSteps && !(s.lo < s.hi)) throw ConfigError("'" + where + "' needs lo < hi");
    if (!(s.rate > 0)) throw ConfigError("'" + where + ".rate' must be positive");
    if (!(s.t1 >= 0) || !(s.sigma >= 0)) throw ConfigError("'" + where + "' needs t1 >= 0 and sigma >= 0");
    return s;
}

Polytope parse_polytope(const json& p)
{
    const json& verts = p.at("vertices");
    if (!verts.is_array() || verts.empty()) throw ConfigError("'plant.vertices' must be a non-empty array of matrices");
    const VectorXd b = get_vector(p.at("b"), "plant.b");
    const VectorXd c = get_vector(p.at("c"), "plant.c");
    std::vector<MatrixXd> A;
    for (const auto& v : verts) {
        if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != b.size())
            throw ConfigError("'plant.vertices' entries must be square matrices matching b");
        MatrixXd M(b.size(), b.size());
        for (Eigen::Index r = 0; r < b.size(); ++r)
            M.row(r) = get_vector(v[static_cast<std::size_t>(r)], "plant.vertices").transpose();
        A.push_back(M);
    }
    try {
        return Polytope(std::move(A), b, c);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

} // namespace

json default_config(const std::string& plant_kind)
{
    json plant;
    if (plant_kind == "cubic_demo") {
        plant = {{"kind", "cubic_demo"}};
    } else if (plant_kind == "pneumatic") {
        const sim::PneumaticPlant d;
        plant = {{"kind", "pneumatic"},
                 {"R_gas", d.R_gas},
                 {"T0", d.T0},
                 {"V_tank", d.V_tank},
                 {"p_in", d.p_in},
                 {"p_U", d.p_U},
                 {"epsilon_reg", d.epsilon_reg},
                 {"valve_gain", d.valve_gain},
                 {"flow_unit", d.flow_unit},
                 {"valve_curve",
                  {{"offset", d.z_f_synthetic.offset},
                   {"amplitude", d.z_f_synthetic.amplitude},
                   {"slope", d.z_f_synthetic.slope},
                   {"center", d.z_f_synthetic.center}}}};
    } else if (plant_kind == "polytope") {
        plant = {{"kind", "polytope"}, {"vertices", nullptr}, {"b", {0.0, 1.0}}, {"c", {1.0, 0.0}}};
    } else {
        throw ConfigError("unknown plant kind '" + plant_kind + "'");
    }
    const sim::GpsolSettings g;
    return {
        {"plant", plant},
        {"controller", {{"K_P", 1.0}, {"K_I", 1.0}, {"mode", "discrete"}, {"y0", nullptr}, {"z_bar0", nullptr}}},
        {"gpsol",
         {{"enabled", false},
          {"bounds", {{0.0, 5.0}}},
          {"n1", g.n1},
          {"sigma_K", g.sigma_K},
          {"length_scale", g.length_scale},
          {"sigma_r", g.sigma_r},
          {"Q_x", g.Q_x},
          {"R_meas", g.R_meas}}},
        {"derl", {{"enabled", false}, {"z_lim", nullptr}, {"sigma_fac", 5.0}}},
        {"scenario",
         {{"T_s", 1e-3},
          {"duration", 10.0},
          {"substeps", 10},
          {"seed", 0},
          {"early_window", 10.0},
          {"record_series", true},
          {"reference", signal_default()},
          {"zeta", signal_default()},
          {"estimate", nullptr}}},
        {"certification",
         {{"y_r_range", nullptr},
          {"e_y_lim", nullptr},
          {"zdot_inf", 0.0},
          {"gain_band", nullptr},
          {"tol", 1e-3},
          {"grid_points", 50},
          {"delta_range", nullptr},
          {"hinf", true}}},
    };
}

EffectiveConfig resolve_config(const json& user)
{
    if (!user.is_object()) throw ConfigError("config must be a JSON object");
    std::string kind = "cubic_demo";
    if (user.contains("plant")) {
        const json& p = user["plant"];
        if (!p.is_object() || !p.contains("kind") || !p["kind"].is_string())
            throw ConfigError("'plant.kind' must be given as a string");
        kind = p["kind"].get<std::string>();
    }
    json doc = merge(default_config(kind), user, "");
    json& sc = doc["scenario"];
    if (!sc["estimate"].is_null()) sc["estimate"] = merge(signal_default(), sc["estimate"], "scenario.estimate");

    EffectiveConfig out;
    out.plant_kind = kind;
    const json& plant = doc["plant"];
    const json& ctl = doc["controller"];
    const json& gp = doc["gpsol"];
    const json& derl = doc["derl"];
    const json& cert = doc["certification"];

    auto& s = out.scenario;
    if (kind == "polytope") {
        if (plant["vertices"].is_null()) throw ConfigError("'plant.vertices' is required for a polytope plant");
        out.polytope = parse_polytope(plant);
    } else if (kind == "pneumatic") {
        sim::PneumaticPlant pn;
        pn.R_gas = get<double>(plant, "R_gas", "plant");
        pn.T0 = get<double>(plant, "T0", "plant");
        pn.V_tank = get<double>(plant, "V_tank", "plant");
        pn.p_in = get<double>(plant, "p_in", "plant");
        pn.p_U = get<double>(plant, "p_U", "plant");
        pn.epsilon_reg = get<double>(plant, "epsilon_reg", "plant");
        pn.valve_gain = get<double>(plant, "valve_gain", "plant");
        pn.flow_unit = get<double>(plant, "flow_unit", "plant");
        const json& vc = plant["valve_curve"];
        pn.z_f_synthetic = {get<double>(vc, "offset", "plant.valve_curve"), get<double>(vc, "amplitude", "plant.valve_curve"),
                            get<double>(vc, "slope", "plant.valve_curve"), get<double>(vc, "center", "plant.valve_curve")};
        try {
            s.plant = sim::pneumatic_model(pn);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        s.pneumatic = pn;
    } else {
        s.plant = sim::cubic_demo_plant();
    }

    s.K_P = get<double>(ctl, "K_P", "controller");
    s.K_I = get<double>(ctl, "K_I", "controller");
    if (!(s.K_P > 0) || !(s.K_I > 0)) throw ConfigError("controller gains must be positive");
    const auto mode = get<std::string>(ctl, "mode", "controller");
    if (mode == "continuous") s.mode = sim::ControllerMode::Continuous;
    else if (mode == "discrete") s.mode = sim::ControllerMode::Discrete;
    else throw ConfigError("'controller.mode' must be continuous or discrete");
    if (!ctl["y0"].is_null()) s.y0 = get<double>(ctl, "y0", "controller");
    if (!ctl["z_bar0"].is_null()) s.z_bar0 = get<double>(ctl, "z_bar0", "controller");

    s.gpsol_on = get<bool>(gp, "enabled", "gpsol");
    s.gpsol.bounds.clear();
    for (const auto& b : gp["bounds"]) s.gpsol.bounds.push_back(get_pair(b, "gpsol.bounds"));
    s.gpsol.n1 = get<int>(gp, "n1", "gpsol");
    s.gpsol.sigma_K = get<double>(gp, "sigma_K", "gpsol");
    s.gpsol.length_scale = get<double>(gp, "length_scale", "gpsol");
    s.gpsol.sigma_r = get<double>(gp, "sigma_r", "gpsol");
    s.gpsol.Q_x = get<double>(gp, "Q_x", "gpsol");
    s.gpsol.R_meas = get<double>(gp, "R_meas", "gpsol");
    if (s.gpsol.bounds.size() != 1) throw ConfigError("'gpsol.bounds' must describe a single input dimension");
    if (s.gpsol.n1 < 2 || !(s.gpsol.sigma_r > 0) || !(s.gpsol.sigma_r < s.gpsol.sigma_K) || !(s.gpsol.length_scale > 0))
        throw ConfigError("gpsol needs n1 >= 2, 0 < sigma_r < sigma_K and a positive length scale");

    s.derl_on = get<bool>(derl, "enabled", "derl");
    s.sigma_fac = get<double>(derl, "sigma_fac", "derl");
    if (!(s.sigma_fac > 0)) throw ConfigError("'derl.sigma_fac' must be positive");
    if (derl["z_lim"].is_null()) {
        out.z_lim_from_bound = true;
    } else {
        s.z_lim = get<double>(derl, "z_lim", "derl");
        if (!(s.z_lim >= 0)) throw ConfigError("'derl.z_lim' must be non-negative");
    }

    s.T_s = get<double>(sc, "T_s", "scenario");
    s.duration = get<double>(sc, "duration", "scenario");
    s.substeps = get<int>(sc, "substeps", "scenario");
    s.seed = get<std::uint64_t>(sc, "seed", "scenario");
    s.early_window = get<double>(sc, "early_window", "scenario");
    s.record_series = get<bool>(sc, "record_series", "scenario");
    s.reference = parse_signal(sc["reference"], "scenario.reference");
    s.zeta = parse_signal(sc["zeta"], "scenario.zeta");
    if (!sc["estimate"].is_null()) s.estimate = parse_signal(sc["estimate"], "scenario.estimate");
    if (!(s.T_s > 0) || !(s.duration > 0) || s.substeps < 1)
        throw ConfigError("scenario needs T_s > 0, duration > 0 and substeps >= 1");
    if (s.mode == sim::ControllerMode::Continuous && (s.gpsol_on || s.derl_on))
        throw ConfigError("gpsol/derl require controller.mode = discrete");

    auto& c = out.cert;
    if (!cert["y_r_range"].is_null()) c.y_r_range = get_pair(cert["y_r_range"], "certification.y_r_range");
    if (!cert["e_y_lim"].is_null()) {
        c.e_y_lim = get<double>(cert, "e_y_lim", "certification");
        if (!(*c.e_y_lim > 0)) throw ConfigError("'certification.e_y_lim' must be positive");
    }
    c.zdot_inf = get<double>(cert, "zdot_inf", "certification");
    if (!cert["gain_band"].is_null()) {
        const auto [lo, hi] = get_pair(cert["gain_band"], "certification.gain_band");
        if (!(lo <= hi)) throw ConfigError("'certification.gain_band' needs lo <= hi");
        c.gain_band = GainBand(lo, hi);
    }
    c.tol = get<double>(cert, "tol", "certification");
    c.grid_points = get<int>(cert, "grid_points", "certification");
    if (!cert["delta_range"].is_null()) c.delta_range = get_pair(cert["delta_range"], "certification.delta_range");
    c.hinf = get<bool>(cert, "hinf", "certification");
    if (!(c.tol > 0) || c.grid_points < 3) throw ConfigError("certification needs tol > 0 and grid_points >= 3");
    if (c.y_r_range && !c.e_y_lim) throw ConfigError("'certification.y_r_range' requires 'certification.e_y_lim'");
    if (c.delta_range && !(c.delta_range->first > 0 && c.delta_range->second > c.delta_range->first))
        throw ConfigError("'certification.delta_range' needs 0 < lo < hi");

    out.doc = std::move(doc);
    return out;
}

json load_json(const std::string& path)
{
    const std::string resolved = resolve_path(path);
    std::ifstream in(resolved);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
}

EffectiveConfig load_config(const std::string& path) { return resolve_config(load_json(path)); }

std::string fixture_root()
{
    if (const char* env = std::getenv("GPBOUND_FIXTURES"); env && *env) return env;
#ifdef GPBOUND_DEFAULT_FIXTURES
    return GPBOUND_DEFAULT_FIXTURES;
#else
    return "fixtures";
#endif
}

std::string resolve_path(const std::string& path)
{
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    const fs::path alt = fs::path(fixture_root()) / path;
    if (fs::exists(alt)) return alt.string();
    return path;
}

void set_param(json& user, const std::string& param, const json& value)
{
    const auto dot = param.find('.');
    if (dot != std::string::npos) {
        const std::string section = param.substr(0, dot);
        const std::string key = param.substr(dot + 1);
        std::string kind = "cubic_demo";
        if (user.contains("plant") && user["plant"].contains("kind")) kind = user["plant"]["kind"].get<std::string>();
        const json defs = default_config(kind);
        if (!defs.contains(section) || !defs[section].is_object() || !defs[section].contains(key) ||
            defs[section][key].is_object())
            throw ConfigError("unknown parameter '" + param + "'");
        user[section][key] = value;
        return;
    }
    std::string kind = "cubic_demo";
    if (user.contains("plant") && user["plant"].contains("kind")) kind = user["plant"]["kind"].get<std::string>();
    const json defs = default_config(kind);
    std::vector<std::string> hits;
    for (const char* s : kSections) {
        if (defs[s].contains(param) && !defs[s][param].is_object()) hits.emplace_back(s);
    }
    if (hits.empty()) throw ConfigError("unknown parameter '" + param + "'");
    if (hits.size() > 1) throw ConfigError("ambiguous parameter '" + param + "'; use section.key");
    user[hits.front()][param] = value;
}

} // namespace gpbound::cli
