#include "sfforce/controller.hpp"

#include "sfforce/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sfforce {

FeedbackController FeedbackController::for_mode(const MechanicalMode& mode, double gain,
                                                double linewidths) {
    FeedbackController c;
    c.gain = gain;
    c.bandpass_center = mode.frequency_hz();
    c.bandpass_fwhm = linewidths * mode.linewidth_hz();
    return c;
}

std::vector<std::string> FeedbackController::violations() const {
    std::vector<std::string> out;
    if (!(gain >= 0.0)) out.emplace_back("gain must be >= 0");
    if (!(bandpass_center > 0.0)) out.emplace_back("bandpass_center must be > 0");
    if (!(bandpass_fwhm > 0.0)) out.emplace_back("bandpass_fwhm must be > 0");
    if (!(loop_delay >= 0.0)) out.emplace_back("loop_delay must be >= 0");
    return out;
}

void validate(const FeedbackController& controller) {
    const auto v = controller.violations();
    if (v.empty()) return;
    std::string msg = "invalid feedback controller:";
    for (const auto& s : v) msg += " " + s + ";";
    throw ConfigurationError(msg);
}

FeedbackLoop::FeedbackLoop(const FeedbackController& controller, const MechanicalMode& mode,
                           double dt)
    : dt_(dt) {
    validate(controller);
    if (!(dt > 0.0)) throw ConfigurationError("FeedbackLoop: dt must be > 0");
    const double w0 = kTwoPi * controller.bandpass_center * dt;
    if (!(w0 < kPi)) throw ConfigurationError("FeedbackLoop: band-pass centre above Nyquist");

    force_scale_ = -mode.mass_eff * controller.gain * mode.gamma_m;

    const double q = controller.bandpass_center / controller.bandpass_fwhm;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0_ = alpha / a0;
    b2_ = -alpha / a0;
    a1_ = -2.0 * std::cos(w0) / a0;
    a2_ = (1.0 - alpha) / a0;

    const double omega = kTwoPi * controller.bandpass_center;
    const double half_sin = std::sin(0.5 * w0);
    d0_ = omega * (2.0 * std::cos(w0) - 1.0) / (2.0 * half_sin);
    d1_ = -omega / (2.0 * half_sin);

    const auto steps = static_cast<std::size_t>(std::llround(controller.loop_delay / dt));
    delay_.assign(steps + 1, 0.0);
}

double FeedbackLoop::update(double x_measured) {
    const double y = b0_ * x_measured + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    const double v = d0_ * y + d1_ * y1_;
    x2_ = x1_;
    x1_ = x_measured;
    y2_ = y1_;
    y1_ = y;

    delay_[head_] = v;
    head_ = (head_ + 1) % delay_.size();
    // The oldest entry sits at head_ after the advance.
    return force_scale_ * delay_[head_];
}

std::complex<double> FeedbackLoop::response(double omega) const {
    using cd = std::complex<double>;
    const double wd = omega * dt_;
    const cd z1 = std::polar(1.0, -wd);
    const cd z2 = z1 * z1;
    const cd bandpass = (b0_ + b2_ * z2) / (1.0 + a1_ * z1 + a2_ * z2);
    const cd derivative = d0_ + d1_ * z1;
    const cd delay = std::polar(1.0, -wd * static_cast<double>(delay_steps()));
    // Zero-order hold: (1 - e^{-i w dt}) / (i w dt), tends to 1 at w = 0.
    const cd hold = wd == 0.0 ? cd(1.0) : (1.0 - z1) / cd(0.0, wd);
    return force_scale_ * bandpass * derivative * delay * hold;
}

void FeedbackLoop::reset() {
    x1_ = x2_ = y1_ = y2_ = 0.0;
    std::fill(delay_.begin(), delay_.end(), 0.0);
    head_ = 0;
}

double feedback_force(const FeedbackController& controller, const MechanicalMode& mode, double dt,
                      std::span<const double> x_measured) {
    FeedbackLoop loop(controller, mode, dt);
    double f = 0.0;
    for (double x : x_measured) f = loop.update(x);
    return f;
}

}  // namespace sfforce
