#pragma once

#include "sfforce/controller.hpp"
#include "sfforce/dynamics.hpp"
#include "sfforce/mode.hpp"
#include "sfforce/spectral.hpp"

#include <span>
#include <string>
#include <vector>

namespace sfforce {

struct PredictedTemperature {
    double t_outofloop = 0.0; // K, true mode temperature
    double t_inloop = 0.0;    // K, apparent temperature of the measured signal
};

/// Closed-loop cold damping with white imprecision noise S_imp (one-sided).
///
/// With K = m omega^2 gamma S_imp / (4 k_B):
///   t_outofloop = T / (1 + g) + K g^2 / (1 + g)
///   t_inloop    = T / (1 + g) - K (g^2 + 2 g) / (1 + g)
///
/// The in-loop value is the background-subtracted area of the measured
/// spectrum, where the imprecision noise fed back through the loop appears
/// as a Lorentzian dip of the closed-loop width (noise squashing). Both
/// expressions assume a velocity estimate that is ideal across the closed-
/// loop linewidth.
PredictedTemperature predicted_temperature(double gain, double t_bath, const MechanicalMode& mode,
                                           double measurement_noise_psd);

/// Gain minimising t_outofloop: sqrt(1 + T/K) - 1, infinite for S_imp = 0.
double optimal_gain(double t_bath, const MechanicalMode& mode, double measurement_noise_psd);

/// Temperatures implied by the closed-loop spectra of the discrete controller
/// that simulate() actually runs (band-pass, differentiator, delay and hold),
/// integrated numerically. With C the controller response and chi the bare
/// susceptibility:
///   S_x = (|chi|^2 S_F + |chi C|^2 S_imp) / |1 - chi C|^2
///   S_y = (|chi|^2 S_F + S_imp) / |1 - chi C|^2
/// t_outofloop integrates S_x over all frequencies; t_inloop integrates
/// S_y - S_imp over |f - f_m| < inloop_halfwidth_hz.
struct ClosedLoopTemperature {
    double t_outofloop = 0.0;
    double t_inloop = 0.0;
};

ClosedLoopTemperature closed_loop_temperature(const FeedbackController& controller,
                                              const MechanicalMode& mode, double t_bath,
                                              double measurement_noise_psd, double dt,
                                              double inloop_halfwidth_hz);

enum class OccupancyForm {
    HighTemperature, // k_B T / (hbar omega) - 1/2, floored at 0
    Bose,            // 1 / (exp(hbar omega / k_B T) - 1)
};

double phonon_occupancy(double temperature, const MechanicalMode& mode,
                        OccupancyForm form = OccupancyForm::HighTemperature);

struct CoolingCurvePoint {
    double gain = 0.0;
    double t_inloop = 0.0;        // K, measured-signal spectrum over the in-loop band, floor removed
    double t_outofloop = 0.0;     // K, true-displacement power over the full band
    double phonon_occupancy = 0.0;
    double t_inloop_sigma = 0.0;
    double t_outofloop_sigma = 0.0;
    PredictedTemperature predicted;   // ideal-loop formula
    ClosedLoopTemperature closed_loop; // spectra of the simulated controller
    bool stable = true;
    std::string diagnostic; // reason when !stable
};

struct CoolingCurveOptions {
    int runs_per_point = 1;         // independent seeds averaged per gain
    std::size_t segment_length = 0; // 0 picks default_segment_length()
    double overlap_fraction = 0.5;
    unsigned workers = 0;           // 0 = hardware concurrency
    double inloop_halfwidth = 0.0;  // Hz; 0 uses the controller band-pass FWHM
    int blocks_per_run = 10;        // for the out-of-loop uncertainty
};

/// Closed-loop simulation at each gain. t_bath and measurement noise come
/// from `config`; the controller template supplies filter settings and the
/// gain is overwritten per point. Instability (non-finite state or a
/// diverging trace) is reported per point.
///
/// t_outofloop is the full-band area of the displacement spectrum, taken as
/// the mean square of the trace (the two agree by Parseval); its sigma comes
/// from the scatter of block means pooled over runs. t_inloop is the area of
/// the measured spectrum within inloop_halfwidth of the mode after removing
/// the imprecision floor, estimated from the band 10 to 40 band-pass widths
/// away from resonance; a Lorentzian-fit thermometer is unsuitable here
/// because squashing distorts the in-loop line shape.
std::vector<CoolingCurvePoint> cooling_curve(std::span<const double> gains, const MechanicalMode& mode,
                                             const FeedbackController& controller_template,
                                             const SimulationConfig& config,
                                             const CoolingCurveOptions& options = {});

}  // namespace sfforce
