#include "sfforce/dynamics.hpp"
#include "sfforce/errors.hpp"
#include "sfforce/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

using namespace sfforce;

namespace {

// Low-Q modes keep long runs (in relaxation times) cheap.
MechanicalMode fast_mode(double q = 20.0, double mass = 2e-11, double f = 1.35e6) {
    MechanicalMode m;
    m.omega_m = kTwoPi * f;
    m.gamma_m = m.omega_m / q;
    m.mass_eff = mass;
    return m;
}

double variance(const std::vector<double>& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s / static_cast<double>(x.size());
}

double temperature_of(const std::vector<double>& x, const MechanicalMode& mode) {
    return variance(x) * mode.mass_eff * mode.omega_m * mode.omega_m / kConstants.k_b;
}

}  // namespace

TEST_CASE("equipartition over a parameter grid") {
    // One record of 4000 relaxation times: sigma_T / T = sqrt(2 / 4000) = 2.2 %, so 5 % is > 2 sigma
    // per point; pooling two seeds brings it to 3.2 sigma.
    for (double t : {0.137, 1.0, 3.0}) {
        for (double q : {10.0, 40.0}) {
            for (double mass : {1e-12, 2e-11}) {
                const auto mode = fast_mode(q, mass);
                double acc = 0.0;
                for (std::uint64_t seed : {11u, 12u}) {
                    auto cfg = SimulationConfig::for_mode(mode, 4000.0);
                    cfg.t_bath = t;
                    cfg.seed = seed;
                    acc += temperature_of(simulate(mode, cfg).x, mode);
                }
                CHECK(acc / 2.0 == doctest::Approx(t).epsilon(0.05));
            }
        }
    }
}

TEST_CASE("zero temperature at rest stays at rest") {
    const auto mode = fast_mode();
    auto cfg = SimulationConfig::for_mode(mode, 10.0);
    cfg.start_at_rest = true;
    const auto tr = simulate(mode, cfg);
    for (double x : tr.x) REQUIRE(x == 0.0);
}

TEST_CASE("same seed gives identical traces, different seeds differ") {
    const auto mode = fast_mode();
    auto cfg = SimulationConfig::for_mode(mode, 50.0);
    cfg.t_bath = 1.0;
    cfg.measurement_noise_psd = 1e-30;
    const auto a = simulate(mode, cfg);
    const auto b = simulate(mode, cfg);
    CHECK(a.x == b.x);
    CHECK(a.x_measured == b.x_measured);
    cfg.seed = 2;
    CHECK(simulate(mode, cfg).x != a.x);
}

TEST_CASE("resonant drive amplitude") {
    // Steady state at resonance: |x| = F0 / (m Omega Gamma)
    const MechanicalMode mode;
    auto cfg = SimulationConfig::for_mode(mode, 20.0);
    cfg.start_at_rest = true;
    cfg.drive = OpticalDrive{mode.omega_m, 0.5, 1e-6};
    const auto forces = compute_forces(1e-6, 1.0, false, {}, {}, mode);
    const double f0 = 0.5 * mode.overlap_eta * forces.f_radiation;
    const auto tr = simulate(mode, cfg, forces);
    const auto r = driven_response(tr, mode.frequency_hz(), mode, TraceChannel::Displacement);
    CHECK(r.amplitude == doctest::Approx(f0 / (mode.mass_eff * mode.omega_m * mode.gamma_m)).epsilon(0.01));
    CHECK(std::abs(r.force) == doctest::Approx(f0).epsilon(0.001));
}

TEST_CASE("drive includes the filtered superfluid term only with a film") {
    const MechanicalMode mode;
    auto cfg = SimulationConfig::for_mode(mode, 10.0);
    cfg.drive = OpticalDrive{mode.omega_m, 1.0, 1e-6};
    const auto forces = compute_forces(1e-6, 1.0, true, {}, {}, mode);
    const auto without = drive_force_phasor(mode, cfg, forces, {});
    const auto with = drive_force_phasor(mode, cfg, forces, {true, false});
    CHECK(std::abs(without) == doctest::Approx(mode.overlap_eta * forces.f_radiation));
    const auto g = superfluid_response_gain(mode.omega_m, cfg.superfluid_cutoff);
    CHECK(std::abs(with - without - g * forces.f_superfluid_modal) < 1e-25);
}

TEST_CASE("response is linear in the drive") {
    const MechanicalMode mode;
    auto cfg = SimulationConfig::for_mode(mode, 5.0);
    cfg.start_at_rest = true;
    cfg.drive = OpticalDrive{mode.omega_m * 1.001, 1.0, 1e-6};
    const auto f1 = compute_forces(1e-6, 1.0, false, {}, {}, mode);
    const auto f2 = compute_forces(2e-6, 1.0, false, {}, {}, mode);
    const auto a = simulate(mode, cfg, f1);
    const auto b = simulate(mode, cfg, f2);
    double max_a = 0.0;
    for (double v : a.x) max_a = std::max(max_a, std::abs(v));
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(b.x[i] - 2.0 * a.x[i]) < 1e-10 * max_a);
}

TEST_CASE("thermal and driven motion superpose") {
    const auto mode = fast_mode();
    auto cfg = SimulationConfig::for_mode(mode, 20.0);
    cfg.t_bath = 0.5;
    const auto thermal = simulate(mode, cfg);
    cfg.drive = OpticalDrive{mode.omega_m, 1.0, 1e-6};
    const auto forces = compute_forces(1e-6, 1.0, false, {}, {}, mode);
    const auto both = simulate(mode, cfg, forces);
    cfg.t_bath = 0.0;
    cfg.start_at_rest = true;
    const auto driven = simulate(mode, cfg, forces);
    const double scale = std::sqrt(variance(thermal.x));
    for (std::size_t i = 0; i < thermal.size(); ++i) {
        REQUIRE(std::abs(both.x[i] - thermal.x[i] - driven.x[i]) < 1e-9 * scale);
    }
}

TEST_CASE("autocorrelation decays at gamma / 2") {
    // Amplitude autocorrelation of the exact integrator: e^{-gamma tau / 2} cos(omega_d tau).
    // Averaging 20 seeds of 5000 relaxation times fits gamma to well under 1 %.
    const auto mode = fast_mode(10.0);
    auto cfg = SimulationConfig::for_mode(mode, 5000.0, 64, 4);
    cfg.t_bath = 1.0;
    const double fs = cfg.sample_rate();
    const std::size_t max_lag = static_cast<std::size_t>(3.0 / mode.gamma_m * fs);
    std::vector<double> acf(max_lag, 0.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        cfg.seed = seed;
        const auto x = simulate(mode, cfg).x;
        for (std::size_t lag = 0; lag < max_lag; ++lag) {
            double s = 0.0;
            for (std::size_t i = 0; i + lag < x.size(); ++i) s += x[i] * x[i + lag];
            acf[lag] += s / static_cast<double>(x.size() - lag);
        }
    }
    // Fit log|acf| - log|cos| over lags where the cosine is not small.
    const double wd = std::sqrt(mode.omega_m * mode.omega_m - 0.25 * mode.gamma_m * mode.gamma_m);
    const double phi = std::atan(0.5 * mode.gamma_m / wd);
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t lag = 0; lag < max_lag; ++lag) {
        const double tau = static_cast<double>(lag) / fs;
        // ACF of the underdamped oscillator: e^{-g tau/2} (cos wd tau + (g / 2wd) sin wd tau)
        const double c = std::cos(wd * tau - phi) / std::cos(phi);
        if (std::abs(c) < 0.5) continue;
        const double y = std::log(std::abs(acf[lag] / acf[0] / c));
        sx += tau;
        sy += y;
        sxx += tau * tau;
        sxy += tau * y;
        n += 1;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(-2.0 * slope == doctest::Approx(mode.gamma_m).epsilon(0.01));
}

TEST_CASE("stored measurement noise has the requested one-sided PSD") {
    const auto mode = fast_mode();
    auto cfg = SimulationConfig::for_mode(mode, 200.0);
    cfg.start_at_rest = true;
    cfg.measurement_noise_psd = 4e-30;
    const auto tr = simulate(mode, cfg);
    std::vector<double> noise(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) noise[i] = tr.x_measured[i] - tr.x[i];
    const auto spec = welch_psd(noise, tr.sample_rate, 4096, 0.5);
    double mean = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 10; k < spec.psd.size() / 4; ++k, ++n) mean += spec.psd[k];
    CHECK(mean / static_cast<double>(n) == doctest::Approx(4e-30).epsilon(0.03));
}

TEST_CASE("thermal force PSD") {
    const MechanicalMode mode;
    CHECK(thermal_force_psd(1.0, mode) ==
          doctest::Approx(4.0 * 1.380649e-23 * 2e-11 * kTwoPi * 530.0).epsilon(1e-12));
    CHECK_THROWS_AS(thermal_force_psd(-1.0, mode), DomainError);
}

TEST_CASE("config validation") {
    const MechanicalMode mode;
    auto cfg = SimulationConfig::for_mode(mode, 10.0);
    CHECK(cfg.violations(mode).empty());
    cfg.dt *= 2.0; // dt * omega_m = 0.196
    CHECK_FALSE(cfg.violations(mode).empty());
    CHECK_THROWS_AS(simulate(mode, cfg), ConfigurationError);
    cfg = SimulationConfig::for_mode(mode, 10.0, 64, 8); // 8 stored samples per period
    CHECK_FALSE(cfg.violations(mode).empty());
}

TEST_CASE("zero-point amplitude and shot-noise imprecision") {
    const MechanicalMode mode;
    CHECK(mode.x_zpf() == doctest::Approx(5.575082087436715e-16).epsilon(1e-9));
    const double s = shot_noise_imprecision_psd(mode, kTwoPi * 23.5e6, 1e4, 0.5);
    CHECK(s == doctest::Approx(std::pow(5.575082087436715e-16, 2) * kTwoPi * 23.5e6 /
                               (8.0 * 0.5 * 1e4 * std::pow(kTwoPi * 12.3, 2)))
                   .epsilon(1e-9));
}
