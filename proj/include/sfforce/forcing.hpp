#pragma once

#include "sfforce/constants.hpp"
#include "sfforce/materials.hpp"
#include "sfforce/mode.hpp"

#include <complex>
#include <string>
#include <vector>

namespace sfforce {

struct OpticalCavity {
    double wavelength = 1555.08e-9;           // m
    double linewidth_kappa = kTwoPi * 23.5e6; // rad/s
    double finesse = 53000.0;
    // Fraction of injected power absorbed at the periphery. Force formulas
    // take absorbed power; this only converts injected sweep powers.
    double absorbed_fraction = 1.0;

    double absorbed_power(double injected) const { return absorbed_fraction * injected; }

    std::vector<std::string> violations() const;
};

void validate(const OpticalCavity& cavity);

struct ForceBreakdown {
    double f_radiation = 0.0;        // N
    double f_superfluid_total = 0.0; // N, radially integrated
    double f_superfluid_modal = 0.0; // N, eta * f_superfluid_total
    double t_evap_used = 0.0;        // K
};

struct ForceBand {
    double low = 0.0;  // N
    double high = 0.0; // N
};

/// F_RP = P_abs * finesse / c.
double radiation_pressure_force(double p_abs, const OpticalCavity& cavity);

/// Radially inward recoil force from evaporating film atoms,
/// (4 / pi^2) * v_rms(T_evap) * mdot(P_abs). The 4/pi^2 factor is the
/// radial projection of isotropic emission into the outward half-space.
double photoconvective_force(double p_abs, double t_evap, const HeliumProperties& props);

/// F_superfluid / F_RP; the absorbed power cancels.
double force_ratio(double t_evap, const OpticalCavity& cavity, const HeliumProperties& props);

/// Projection of a radially distributed force onto the mode: eta * f_total.
double modal_force(double f_total, const MechanicalMode& mode);

/// Photoconvective force for evaporation temperatures between the mode
/// temperature and t_mode + delta_max.
ForceBand theory_band(double p_abs, double t_mode, double delta_max, const HeliumProperties& props);

/// Single- (or n-) pole low-pass 1 / (1 + i w / w_c)^order applied to the
/// superfluid force modulation. Radiation pressure is not filtered.
std::complex<double> superfluid_response_gain(double drive_frequency, double cutoff, int order = 1);

/// All force contributions at one operating point. The superfluid terms are
/// zero when no film is present.
ForceBreakdown compute_forces(double p_abs, double t_evap, bool film_present,
                              const OpticalCavity& cavity, const HeliumProperties& props,
                              const MechanicalMode& mode);

}  // namespace sfforce
