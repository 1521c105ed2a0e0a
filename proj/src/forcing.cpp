#include "sfforce/forcing.hpp"

#include "sfforce/errors.hpp"

#include <cmath>

namespace sfforce {

namespace {
constexpr double kHalfSpaceFactor = 4.0 / (kPi * kPi);
}

std::vector<std::string> OpticalCavity::violations() const {
    std::vector<std::string> out;
    if (!(wavelength > 0.0)) out.emplace_back("wavelength must be > 0");
    if (!(linewidth_kappa > 0.0)) out.emplace_back("linewidth_kappa must be > 0");
    if (!(finesse > 0.0)) out.emplace_back("finesse must be > 0");
    if (!(absorbed_fraction >= 0.0 && absorbed_fraction <= 1.0)) {
        out.emplace_back("absorbed_fraction must lie in [0, 1]");
    }
    return out;
}

void validate(const OpticalCavity& cavity) {
    const auto v = cavity.violations();
    if (v.empty()) return;
    std::string msg = "invalid optical cavity:";
    for (const auto& s : v) msg += " " + s + ";";
    throw ConfigurationError(msg);
}

double radiation_pressure_force(double p_abs, const OpticalCavity& cavity) {
    if (!(p_abs >= 0.0)) throw DomainError("radiation_pressure_force: absorbed power must be >= 0 W");
    return p_abs * cavity.finesse / kConstants.c;
}

double photoconvective_force(double p_abs, double t_evap, const HeliumProperties& props) {
    return kHalfSpaceFactor * rms_evaporation_velocity(t_evap, props) *
           steady_state_mass_flow(p_abs, props);
}

double force_ratio(double t_evap, const OpticalCavity& cavity, const HeliumProperties& props) {
    if (!(t_evap > 0.0)) throw DomainError("force_ratio: evaporation temperature must be > 0 K");
    constexpr double p_ref = 1.0;
    return photoconvective_force(p_ref, t_evap, props) / radiation_pressure_force(p_ref, cavity);
}

double modal_force(double f_total, const MechanicalMode& mode) {
    return mode.overlap_eta * f_total;
}

ForceBand theory_band(double p_abs, double t_mode, double delta_max, const HeliumProperties& props) {
    if (!(delta_max >= 0.0)) throw DomainError("theory_band: delta_max must be >= 0 K");
    return {photoconvective_force(p_abs, t_mode, props),
            photoconvective_force(p_abs, t_mode + delta_max, props)};
}

std::complex<double> superfluid_response_gain(double drive_frequency, double cutoff, int order) {
    if (!(cutoff > 0.0)) throw DomainError("superfluid_response_gain: cutoff must be > 0");
    if (order < 1) throw DomainError("superfluid_response_gain: filter order must be >= 1");
    const std::complex<double> stage = 1.0 / std::complex<double>(1.0, drive_frequency / cutoff);
    std::complex<double> gain = stage;
    for (int i = 1; i < order; ++i) gain *= stage;
    return gain;
}

ForceBreakdown compute_forces(double p_abs, double t_evap, bool film_present,
                              const OpticalCavity& cavity, const HeliumProperties& props,
                              const MechanicalMode& mode) {
    ForceBreakdown out;
    out.f_radiation = radiation_pressure_force(p_abs, cavity);
    out.t_evap_used = t_evap;
    if (film_present) {
        out.f_superfluid_total = photoconvective_force(p_abs, t_evap, props);
        out.f_superfluid_modal = modal_force(out.f_superfluid_total, mode);
    }
    return out;
}

}  // namespace sfforce
