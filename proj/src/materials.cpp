#include "sfforce/materials.hpp"

#include "sfforce/constants.hpp"
#include "sfforce/errors.hpp"

#include <cmath>

namespace sfforce {

std::vector<std::string> HeliumProperties::violations() const {
    std::vector<std::string> out;
    if (!(m_he > 0.0)) out.emplace_back("m_he must be > 0");
    if (!(mu_vdw >= 0.0)) out.emplace_back("mu_vdw must be >= 0");
    if (!(latent_heat > mu_vdw)) out.emplace_back("latent_heat must exceed mu_vdw");
    if (!(v_landau >= 0.0)) out.emplace_back("v_landau must be >= 0");
    if (!(t_film_transition > 0.0)) out.emplace_back("t_film_transition must be > 0");
    if (!(film_thickness > 0.0)) out.emplace_back("film_thickness must be > 0");
    if (!(flow_width >= 0.0)) out.emplace_back("flow_width must be >= 0");
    if (!(density >= 0.0)) out.emplace_back("density must be >= 0");
    return out;
}

void validate(const HeliumProperties& props) {
    const auto v = props.violations();
    if (v.empty()) return;
    std::string msg = "invalid helium properties:";
    for (const auto& s : v) msg += " " + s + ";";
    throw ConfigurationError(msg);
}

double rms_evaporation_velocity(double t_evap, const HeliumProperties& props) {
    if (!(t_evap >= 0.0)) throw DomainError("rms_evaporation_velocity: temperature must be >= 0 K");
    return std::sqrt(3.0 * kConstants.k_b * t_evap / props.m_he);
}

double steady_state_mass_flow(double p_abs, const HeliumProperties& props) {
    if (!(p_abs >= 0.0)) throw DomainError("steady_state_mass_flow: absorbed power must be >= 0 W");
    const double l_eff = props.effective_latent_heat();
    if (!(l_eff > 0.0)) {
        throw ConfigurationError("steady_state_mass_flow: latent_heat - mu_vdw must be > 0");
    }
    return p_abs / l_eff;
}

double max_film_mass_flow(const HeliumProperties& props) {
    return props.density * props.v_landau * props.film_thickness * props.flow_width;
}

double calibrate_flow_width(const HeliumProperties& props, double target_power) {
    if (!(target_power >= 0.0)) throw DomainError("calibrate_flow_width: target power must be >= 0 W");
    const double per_width =
        props.effective_latent_heat() * props.density * props.v_landau * props.film_thickness;
    if (!(per_width > 0.0)) {
        throw ConfigurationError("calibrate_flow_width: resupply rate per unit width is not positive");
    }
    return target_power / per_width;
}

}  // namespace sfforce
