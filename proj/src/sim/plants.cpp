#include "gpbound/sim/plants.hpp"

#include <cmath>
#include <stdexcept>

namespace gpbound::sim {

double ValveCurve::operator()(double u_z) const { return offset + amplitude / (1.0 + std::exp(-slope * (u_z - center))); }

void PneumaticPlant::validate() const
{
    if (!(R_gas > 0) || !(T0 > 0) || !(V_tank > 0)) throw std::invalid_argument("PneumaticPlant: R, T, V must be positive");
    if (!(p_U >= 0) || !(p_in > p_U)) throw std::invalid_argument("PneumaticPlant: need 0 <= p_U < p_in");
    if (!(epsilon_reg > 0)) throw std::invalid_argument("PneumaticPlant: epsilon_reg must be positive");
    if (!(valve_gain > 0) || !(flow_unit > 0)) throw std::invalid_argument("PneumaticPlant: valve_gain, flow_unit must be positive");
}

double psi(double dp, double eps)
{
    if (dp == 0.0) return 0.0;
    const double mag = -0.5 * eps + std::sqrt(0.25 * eps * eps + std::abs(dp));
    return std::copysign(mag, dp);
}

double PneumaticPlant::psi_bar(double dp_bar) const { return psi(dp_bar * 1e5, epsilon_reg); }

double PneumaticPlant::inlet_flow(double p, double u_C) const
{
    return valve_gain * u_C * (u_C >= 0 ? psi_bar(p_in - p) : psi_bar(p - p_U));
}

double PneumaticPlant::inlet_voltage(double p, double flow) const
{
    const double drive = flow >= 0 ? psi_bar(p_in - p) : psi_bar(p - p_U);
    if (!(drive > 0)) throw std::domain_error("PneumaticPlant: pressure outside (p_U, p_in), inlet not invertible");
    return flow / (valve_gain * drive);
}

double pneumatic_rhs(double p, double u_C, double u_z, const PneumaticPlant& plant)
{
    return plant.gain() * (plant.inlet_flow(p, u_C) - plant.psi_bar(p - plant.p_U) * plant.z_f_synthetic(u_z));
}

PlantModel pneumatic_model(const PneumaticPlant& plant)
{
    plant.validate();
    PlantModel m;
    const double k = plant.gain();
    m.a = [](double, double) { return 0.0; };
    m.b = [k](double, double) { return k; };
    m.e = [plant, k](double y, double) { return -k * plant.psi_bar(y - plant.p_U); };
    m.z_f = [curve = plant.z_f_synthetic](const VectorXd& zeta) { return curve(zeta(0)); };
    m.zeta_lo = VectorXd::Constant(1, 0.0);
    m.zeta_hi = VectorXd::Constant(1, 5.0);
    return m;
}

PlantModel cubic_demo_plant()
{
    PlantModel m;
    m.a = [](double y, double) { return -1.0 + y * y * y; };
    m.b = [](double y, double) { return y * y * y; };
    m.e = [](double y, double) { return y; };
    m.z_f = [](const VectorXd& zeta) { return zeta(0); };
    return m;
}

} // namespace gpbound::sim
