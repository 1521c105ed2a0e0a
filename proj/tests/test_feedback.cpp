#include "sfforce/controller.hpp"
#include "sfforce/errors.hpp"
#include "sfforce/feedback.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace sfforce;

namespace {

MechanicalMode fast_mode(double q = 50.0) {
    MechanicalMode m;
    m.gamma_m = m.omega_m / q;
    return m;
}

}  // namespace

TEST_CASE("zero gain gives zero force") {
    const MechanicalMode mode;
    const auto c = FeedbackController::for_mode(mode, 0.0);
    FeedbackLoop loop(c, mode, kTwoPi / (64 * mode.omega_m));
    for (int i = 0; i < 1000; ++i) CHECK(loop.update(1e-12 * std::sin(0.1 * i)) == 0.0);
}

TEST_CASE("force opposes velocity for a sinusoid") {
    // x = A sin(Omega t): |F| = m g Gamma Omega A, in antiphase with the velocity
    const MechanicalMode mode;
    const double g = 3.0, a = 1e-12;
    const auto c = FeedbackController::for_mode(mode, g);
    const double dt = kTwoPi / (64 * mode.omega_m);
    FeedbackLoop loop(c, mode, dt);
    const double expected = mode.mass_eff * g * mode.gamma_m * mode.omega_m * a;
    const int settle = 64 * 2000; // band-pass settles in ~1 / (pi fwhm)
    double peak = 0.0, corr = 0.0;
    for (int i = 0; i < settle + 64 * 10; ++i) {
        const double t = i * dt;
        const double f = loop.update(a * std::sin(mode.omega_m * t));
        if (i >= settle) {
            peak = std::max(peak, std::abs(f));
            // velocity at the middle of the hold interval
            corr += f * std::cos(mode.omega_m * (t + 0.5 * dt));
        }
    }
    CHECK(peak == doctest::Approx(expected).epsilon(0.01));
    CHECK(corr < 0.0);
}

TEST_CASE("half-period delay flips the force sign") {
    const MechanicalMode mode;
    const double dt = kTwoPi / (64 * mode.omega_m);
    auto c = FeedbackController::for_mode(mode, 1.0);
    c.loop_delay = kPi / mode.omega_m;
    FeedbackLoop delayed(c, mode, dt);
    c.loop_delay = 0.0;
    FeedbackLoop prompt(c, mode, dt);
    CHECK(delayed.delay_steps() == 32);
    double dot = 0.0, norm = 0.0;
    for (int i = 0; i < 64 * 3000; ++i) {
        const double x = 1e-12 * std::sin(mode.omega_m * i * dt);
        const double a = delayed.update(x);
        const double b = prompt.update(x);
        if (i > 64 * 2000) {
            dot += a * b;
            norm += b * b;
        }
    }
    CHECK(dot / norm == doctest::Approx(-1.0).epsilon(0.01));
}

TEST_CASE("loop response matches time-domain behaviour") {
    const MechanicalMode mode;
    const double dt = kTwoPi / (64 * mode.omega_m);
    const auto c = FeedbackController::for_mode(mode, 2.0);
    FeedbackLoop loop(c, mode, dt);
    // At the centre the controller applies -m g Gamma times the velocity (i omega x).
    const auto h = loop.response(mode.omega_m);
    const std::complex<double> ideal(0.0, -mode.mass_eff * 2.0 * mode.gamma_m * mode.omega_m);
    CHECK(std::abs(h / ideal) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(std::arg(h / ideal)) < 1e-3);
}

TEST_CASE("controller invariants") {
    FeedbackController c;
    c.gain = -1.0;
    CHECK_THROWS_AS(validate(c), ConfigurationError);
    c = {};
    c.bandpass_fwhm = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigurationError);
    c = {};
    c.loop_delay = -1e-9;
    CHECK_THROWS_AS(validate(c), ConfigurationError);
}

TEST_CASE("predicted temperature") {
    const MechanicalMode mode;
    const auto zero = predicted_temperature(0.0, 0.715, mode, 1e-31);
    CHECK(zero.t_outofloop == doctest::Approx(0.715));
    CHECK(zero.t_inloop == doctest::Approx(0.715));
    // 0.715 / (1 + 4.22)
    CHECK(predicted_temperature(4.22, 0.715, mode, 0.0).t_outofloop ==
          doctest::Approx(0.13697318007662834).epsilon(1e-12));
    CHECK(std::abs(predicted_temperature(4.22, 0.715, mode, 0.0).t_outofloop - 0.137) < 0.001);
    CHECK_THROWS_AS(predicted_temperature(-1.0, 0.715, mode, 0.0), DomainError);
}

TEST_CASE("noise-heating turnaround") {
    const MechanicalMode mode;
    const double s = 7.7e-32;
    const double g_opt = optimal_gain(0.715, mode, s);
    double prev = 1e9;
    for (double g = 0.0; g < g_opt; g += g_opt / 50) {
        const double t = predicted_temperature(g, 0.715, mode, s).t_outofloop;
        CHECK(t < prev);
        prev = t;
    }
    prev = predicted_temperature(g_opt, 0.715, mode, s).t_outofloop;
    for (double g = g_opt * 1.02; g < 10 * g_opt; g *= 1.1) {
        const double t = predicted_temperature(g, 0.715, mode, s).t_outofloop;
        CHECK(t > prev);
        prev = t;
    }
    CHECK(std::isinf(optimal_gain(0.715, mode, 0.0)));
}

TEST_CASE("squashing inequality, analytic") {
    const MechanicalMode mode;
    const double dt = kTwoPi / (64 * mode.omega_m);
    for (double g : {0.0, 0.1, 1.0, 3.0, 10.0, 30.0}) {
        const auto p = predicted_temperature(g, 0.715, mode, 7.7e-32);
        CHECK(p.t_inloop <= p.t_outofloop);
        const auto c = FeedbackController::for_mode(mode, g);
        const auto cl = closed_loop_temperature(c, mode, 0.715, 7.7e-32, dt, c.bandpass_fwhm);
        CHECK(cl.t_inloop <= cl.t_outofloop);
    }
    const auto p = predicted_temperature(5.0, 0.715, mode, 0.0);
    CHECK(p.t_inloop == doctest::Approx(p.t_outofloop));
}

TEST_CASE("closed-loop spectra reduce to the bath at zero gain") {
    const MechanicalMode mode;
    const double dt = kTwoPi / (64 * mode.omega_m);
    const auto c = FeedbackController::for_mode(mode, 0.0);
    const auto cl = closed_loop_temperature(c, mode, 0.715, 1e-31, dt, 1e9);
    CHECK(cl.t_outofloop == doctest::Approx(0.715).epsilon(1e-3));
    CHECK(cl.t_inloop == doctest::Approx(0.715).epsilon(1e-3));
}

TEST_CASE("closed-loop spectra approach the ideal formula for a wide band-pass") {
    const MechanicalMode mode;
    const double dt = kTwoPi / (64 * mode.omega_m);
    const auto c = FeedbackController::for_mode(mode, 3.0, 2000.0);
    const auto cl = closed_loop_temperature(c, mode, 0.715, 0.0, dt, c.bandpass_fwhm);
    CHECK(cl.t_outofloop == doctest::Approx(0.715 / 4.0).epsilon(0.02));
}

TEST_CASE("phonon occupancy") {
    const MechanicalMode mode;
    CHECK(phonon_occupancy(0.137, mode) == doctest::Approx(2114.030978996264).epsilon(1e-9));
    CHECK(std::abs(phonon_occupancy(0.137, mode) - 2114.0) < 5.0);
    CHECK(phonon_occupancy(0.137, mode, OccupancyForm::Bose) == doctest::Approx(2114.031018406107).epsilon(1e-9));
    CHECK(phonon_occupancy(0.0, mode) == 0.0);
    CHECK(phonon_occupancy(0.274, mode) / phonon_occupancy(0.137, mode) == doctest::Approx(2.0).epsilon(1e-3));
    CHECK_THROWS_AS(phonon_occupancy(-0.1, mode), DomainError);
}

TEST_CASE("feedback off reproduces the open-loop trace exactly") {
    const auto mode = fast_mode();
    auto cfg = SimulationConfig::for_mode(mode, 100.0);
    cfg.t_bath = 0.715;
    cfg.measurement_noise_psd = 1e-31;
    const auto c = FeedbackController::for_mode(mode, 0.0);
    const auto open = simulate(mode, cfg);
    const auto closed = simulate(mode, cfg, {}, {}, &c);
    CHECK(open.x == closed.x);
    CHECK(open.x_measured == closed.x_measured);
}

TEST_CASE("cooling curve on a low-Q mode") {
    // Band-pass 20 linewidths wide (Q_bp = 10) keeps the closed-loop width well inside the filter.
    const auto mode = fast_mode(200.0);
    auto cfg = SimulationConfig::for_mode(mode, 1000.0);
    cfg.t_bath = 0.715;
    cfg.measurement_noise_psd = 1e-33; // optimal gain ~ 25 for this linewidth
    const auto c = FeedbackController::for_mode(mode, 0.0, 20.0);
    CoolingCurveOptions opt;
    opt.runs_per_point = 2;
    const std::vector<double> gains{0.0, 1.0, 3.0};
    const auto pts = cooling_curve(gains, mode, c, cfg, opt);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].t_outofloop == doctest::Approx(0.715).epsilon(0.05));
    for (const auto& p : pts) {
        CHECK(p.stable);
        CHECK(std::abs(p.t_outofloop - p.closed_loop.t_outofloop) < 3.0 * p.t_outofloop_sigma);
        CHECK(p.t_inloop <= p.t_outofloop + 3.0 * std::hypot(p.t_inloop_sigma, p.t_outofloop_sigma));
        CHECK(p.phonon_occupancy == doctest::Approx(phonon_occupancy(p.t_outofloop, mode)));
    }
    CHECK(pts[2].t_outofloop < pts[1].t_outofloop);
}

TEST_CASE("anti-damping delay is flagged per point") {
    const auto mode = fast_mode(50.0);
    auto cfg = SimulationConfig::for_mode(mode, 200.0);
    cfg.t_bath = 0.715;
    auto c = FeedbackController::for_mode(mode, 0.0, 10.0);
    c.loop_delay = kPi / mode.omega_m;
    const std::vector<double> gains{0.0, 5.0};
    const auto pts = cooling_curve(gains, mode, c, cfg);
    CHECK(pts[0].stable);
    CHECK_FALSE(pts[1].stable);
    CHECK_FALSE(pts[1].diagnostic.empty());
}

TEST_CASE("cooling curve rejects unsorted gains") {
    const MechanicalMode mode;
    const std::vector<double> gains{1.0, 0.5};
    CHECK_THROWS_AS(cooling_curve(gains, mode, {}, SimulationConfig::for_mode(mode, 10.0)), ArgumentError);
}
