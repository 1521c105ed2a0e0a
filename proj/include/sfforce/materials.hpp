#pragma once

#include <string>
#include <vector>

namespace sfforce {

/// Helium-4 constants and thin-film parameters.
///
/// latent_heat and mu_vdw are calibration values: their difference
/// (2.4e4 J/kg) reproduces a photoconvective/radiation-pressure force ratio
/// of 4e5/finesse at a 1 K evaporation temperature. v_landau, density,
/// film_thickness and flow_width set the Landau-limited resupply rate;
/// flow_width is solved so the boil-off threshold sits at 2.2 uW.
struct HeliumProperties {
    double m_he = 6.6464731e-27;             // kg
    double latent_heat = 2.59e4;             // J/kg
    double mu_vdw = 1.9e3;                   // J/kg
    double v_landau = 58.0;                  // m/s
    double t_film_transition = 0.85;         // K
    double film_thickness = 5.0e-9;          // m
    double flow_width = 2.1799445105033688e-6; // m
    double density = 145.0;                  // kg/m^3

    double effective_latent_heat() const { return latent_heat - mu_vdw; }

    /// One message per violated invariant; empty when valid.
    std::vector<std::string> violations() const;
};

// Throws ConfigurationError listing every violation.
void validate(const HeliumProperties& props);

/// sqrt(3 k_B T / m_He). Throws DomainError for t_evap < 0.
double rms_evaporation_velocity(double t_evap, const HeliumProperties& props);

/// Evaporative mass flow balancing an absorbed heat load:
/// p_abs / (L - <mu_VDW>).
double steady_state_mass_flow(double p_abs, const HeliumProperties& props);

/// Landau-limited film resupply: density * v_landau * thickness * width.
double max_film_mass_flow(const HeliumProperties& props);

/// Flow width for which (L - <mu_VDW>) * max_film_mass_flow equals
/// target_power, all other properties held fixed.
double calibrate_flow_width(const HeliumProperties& props, double target_power);

}  // namespace sfforce
