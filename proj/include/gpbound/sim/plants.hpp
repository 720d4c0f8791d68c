#pragma once

#include "gpbound/model_core.hpp"

namespace gpbound::sim {

// Scaled logistic  offset + amplitude / (1 + exp(-slope (u_z - center))).
struct ValveCurve {
    double offset = 2.0;
    double amplitude = 10.0;
    double slope = 0.8;
    double center = 2.5;

    double operator()(double u_z) const;
};

// Isothermal tank: pressures in bar (gauge), flows in units of flow_unit g/s, Psi in sqrt(Pa).
struct PneumaticPlant {
    double R_gas = 0.2871;   // J/(g K)
    double T0 = 293.15;      // K
    double V_tank = 4e-4;    // m^3
    double p_in = 4.0;       // bar
    double p_U = 0.0;        // bar
    double epsilon_reg = 1.0; // sqrt(Pa)
    double valve_gain = 1.0;
    double flow_unit = 1e-4; // g/s
    ValveCurve z_f_synthetic;

    void validate() const;
    // Pressure rate in bar/s per unit mass flow.
    double gain() const { return R_gas * T0 / V_tank * flow_unit * 1e-5; }
    double psi_bar(double dp_bar) const;
    // g and its inverse g_I in the valve voltage u_C.
    double inlet_flow(double p, double u_C) const;
    double inlet_voltage(double p, double flow) const;
};

// sgn(dp) (-eps/2 + sqrt(eps^2/4 + |dp|))
double psi(double dp, double eps);

double pneumatic_rhs(double p, double u_C, double u_z, const PneumaticPlant& plant);

// Model seen by the controller: a = 0, b = gain, e = -gain Psi(y - p_U), zeta = u_z in [0, 5] V.
PlantModel pneumatic_model(const PneumaticPlant& plant);

// a = -1 + y^3, b = y^3, e = y, z_f(zeta) = zeta.
PlantModel cubic_demo_plant();

} // namespace gpbound::sim
