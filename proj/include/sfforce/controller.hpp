#pragma once

#include "sfforce/mode.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sfforce {

enum class VelocityEstimator {
    BandpassDifferentiator,
};

/// Cold-damping controller. The gain is expressed in units of the intrinsic
/// damping rate, so an ideal loop adds g * gamma_m of damping.
struct FeedbackController {
    double gain = 0.0;
    double bandpass_center = 1.35e6; // Hz
    double bandpass_fwhm = 50 * 530.0; // Hz
    double loop_delay = 0.0;        // s
    VelocityEstimator derivative_mode = VelocityEstimator::BandpassDifferentiator;

    /// Band-pass centred on the mode, `linewidths` mechanical linewidths wide.
    static FeedbackController for_mode(const MechanicalMode& mode, double gain,
                                       double linewidths = 50.0);

    std::vector<std::string> violations() const;
};

void validate(const FeedbackController& controller);

/// Discrete-time realisation of the controller running at a fixed step.
///
/// Each update takes one measured displacement sample and returns the force
/// to hold over the following step. The velocity estimate is a second-order
/// band-pass (unity gain, zero phase at the centre) followed by a two-tap
/// differentiator whose response at the centre frequency is exactly
/// i w e^{i w dt / 2}, i.e. the velocity at the midpoint of the hold interval.
/// loop_delay is rounded to a whole number of steps.
class FeedbackLoop {
public:
    FeedbackLoop(const FeedbackController& controller, const MechanicalMode& mode, double dt);

    double update(double x_measured);
    void reset();

    std::size_t delay_steps() const { return delay_.size() - 1; }

    /// Force per unit measured displacement at angular frequency omega,
    /// including the band-pass, differentiator, delay line and the hold of
    /// the output over one step. Independent of the filter state.
    std::complex<double> response(double omega) const;

private:
    double dt_;
    double force_scale_; // -m * g * gamma_m
    // band-pass biquad, direct form I
    double b0_, b2_, a1_, a2_;
    double x1_ = 0.0, x2_ = 0.0, y1_ = 0.0, y2_ = 0.0;
    // differentiator taps
    double d0_, d1_;
    std::vector<double> delay_;
    std::size_t head_ = 0;
};

/// Runs a fresh loop over a measured displacement history and returns the
/// force after the last sample.
double feedback_force(const FeedbackController& controller, const MechanicalMode& mode, double dt,
                      std::span<const double> x_measured);

}  // namespace sfforce
