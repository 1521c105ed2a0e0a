#pragma once

#include "sfforce/constants.hpp"

#include <complex>
#include <string>
#include <vector>

namespace sfforce {

/// A single mechanical mode treated as a damped harmonic oscillator.
///
/// Defaults describe the first-order flexural mode of the microtoroid
/// (1.35 MHz, 530 Hz linewidth, g0/2pi = 12.3 Hz, 0.037 % overlap with the
/// radial evaporative force). mass_eff is not a measured quantity; the
/// default of 20 ng is roughly the silica mass of the toroidal rim.
struct MechanicalMode {
    double omega_m = kTwoPi * 1.35e6; // rad/s
    double gamma_m = kTwoPi * 530.0;  // rad/s, energy damping rate
    double mass_eff = 2.0e-11;        // kg
    double g0 = kTwoPi * 12.3;        // rad/s
    double overlap_eta = 3.7e-4;

    double frequency_hz() const { return omega_m / kTwoPi; }
    double linewidth_hz() const { return gamma_m / kTwoPi; }
    double quality_factor() const { return omega_m / gamma_m; }

    /// Mechanical susceptibility for x(t) = Re[X e^{i w t}] driven by
    /// F(t) = Re[F e^{i w t}]: X = chi(w) F.
    std::complex<double> susceptibility(double omega) const {
        return 1.0 / (mass_eff * std::complex<double>(omega_m * omega_m - omega * omega,
                                                      gamma_m * omega));
    }

    /// Equipartition variance k_B T / (m Omega^2).
    double thermal_variance(double temperature) const {
        return kConstants.k_b * temperature / (mass_eff * omega_m * omega_m);
    }

    /// Zero-point fluctuation amplitude sqrt(hbar / (2 m Omega)).
    double x_zpf() const;

    std::vector<std::string> violations() const;
};

void validate(const MechanicalMode& mode);

}  // namespace sfforce
