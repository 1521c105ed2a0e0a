#pragma once

#include "sfforce/controller.hpp"
#include "sfforce/forcing.hpp"
#include "sfforce/mode.hpp"
#include "sfforce/thermal.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sfforce {

/// Amplitude-modulated probe: P(t) = P_carrier (1 + depth cos(w t)).
struct OpticalDrive {
    double frequency = 0.0;       // rad/s
    double modulation_depth = 0.0;
    double carrier_power = 0.0;   // W absorbed; forces must be evaluated at this power
};

struct SimulationConfig {
    double dt = 0.0;        // internal step, s
    double duration = 0.0;  // s
    std::uint64_t seed = 1;
    double t_bath = 0.0;    // K
    std::optional<OpticalDrive> drive;
    double measurement_noise_psd = 0.0; // m^2/Hz, one-sided imprecision
    int output_stride = 1;              // internal steps per stored sample
    bool start_at_rest = false;         // otherwise draw x(0), v(0) from equilibrium
    double superfluid_cutoff = kTwoPi * 2.0e6; // rad/s
    int superfluid_filter_order = 1;

    /// Step of 2 pi / (omega_m * steps_per_period), stored every
    /// output_stride steps, running for relaxation_times / gamma_m.
    static SimulationConfig for_mode(const MechanicalMode& mode, double relaxation_times,
                                     int steps_per_period = 64, int output_stride = 4);

    double sample_rate() const { return 1.0 / (dt * output_stride); }

    std::vector<std::string> violations(const MechanicalMode& mode) const;
};

struct Trace {
    double sample_rate = 0.0;          // Hz
    std::vector<double> x;             // m
    std::vector<double> x_measured;    // m, x plus imprecision noise
    std::vector<double> force_applied; // N, drive + feedback (no thermal force)

    std::size_t size() const { return x.size(); }
    double duration() const { return static_cast<double>(x.size()) / sample_rate; }
};

/// One-sided thermal force PSD 4 k_B T m gamma_m (N^2/Hz). Integrating the
/// resulting displacement PSD over 0..inf gives k_B T / (m omega_m^2).
double thermal_force_psd(double t_bath, const MechanicalMode& mode);

/// Complex amplitude of the modal drive force,
/// depth * (eta F_RP + G_sf(w) eta F_sf), with the superfluid term present
/// only when the film is.
std::complex<double> drive_force_phasor(const MechanicalMode& mode, const SimulationConfig& config,
                                        const ForceBreakdown& forces, const FilmState& film);

/// Shot-noise-limited homodyne imprecision (one-sided, m^2/Hz) on resonance
/// of a cavity with linewidth kappa holding n_cav photons, detected with
/// efficiency eta_det: x_zpf^2 kappa / (8 eta_det n_cav g0^2).
double shot_noise_imprecision_psd(const MechanicalMode& mode, double kappa, double n_cav,
                                  double detection_efficiency);

/// Integrates  m x'' + m gamma_m x' + m omega_m^2 x = F_th + F_drive + F_fb.
///
/// The homogeneous flow and the thermal noise are propagated with the exact
/// matrix exponential and the exact per-step noise covariance. The coherent
/// drive is carried analytically by its steady-state particular solution,
/// and the feedback force is held constant across each step. The stored
/// x_measured adds white imprecision noise whose samples are the mean of
/// the internal-rate noise seen by the controller over each output
/// interval, so its one-sided PSD equals measurement_noise_psd.
///
/// Deterministic for a given seed. Throws ConfigurationError on invalid
/// input and IntegratorFault if the state stops being finite.
Trace simulate(const MechanicalMode& mode, const SimulationConfig& config,
               const ForceBreakdown& forces = {}, const FilmState& film = {},
               const FeedbackController* controller = nullptr);

}  // namespace sfforce
