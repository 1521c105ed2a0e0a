#include "sfforce/dynamics.hpp"
#include "sfforce/errors.hpp"
#include "sfforce/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace sfforce;

namespace {

double variance(const std::vector<double>& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s / static_cast<double>(x.size());
}

std::vector<double> white_noise(std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    std::vector<double> x(n);
    for (auto& v : x) v = normal(rng);
    return x;
}

}  // namespace

TEST_CASE("white noise PSD level") {
    // One-sided: sigma^2 = S fs / 2
    const double fs = 1000.0;
    const auto x = white_noise(1 << 18, 2.0, 5);
    const auto spec = welch_psd(x, fs, 1024, 0.5);
    double mean = 0.0;
    for (std::size_t k = 1; k + 1 < spec.psd.size(); ++k) mean += spec.psd[k];
    mean /= static_cast<double>(spec.psd.size() - 2);
    CHECK(mean == doctest::Approx(2.0 * 4.0 / fs).epsilon(0.01));
    CHECK(spec.frequencies.size() == 513);
    CHECK(spec.bin_width() == doctest::Approx(fs / 1024));
    CHECK(spec.resolution_bandwidth == doctest::Approx(1.5 * fs / 1024).epsilon(1e-9));
}

TEST_CASE("Parseval round trip") {
    const double fs = 1000.0;
    SUBCASE("white noise") {
        const auto x = white_noise(1 << 16, 1.0, 9);
        const auto spec = welch_psd(x, fs, 2048, 0.5);
        CHECK(spec.integrate(0.0, fs / 2) == doctest::Approx(variance(x)).epsilon(0.02));
    }
    SUBCASE("sinusoid plus noise") {
        auto x = white_noise(1 << 16, 0.1, 10);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += 3.0 * std::sin(kTwoPi * 123.4 * static_cast<double>(i) / fs);
        const auto spec = welch_psd(x, fs, 2048, 0.5);
        CHECK(spec.integrate(0.0, fs / 2) == doctest::Approx(variance(x)).epsilon(0.02));
    }
    SUBCASE("thermal trace") {
        MechanicalMode mode;
        mode.gamma_m = mode.omega_m / 30.0;
        auto cfg = SimulationConfig::for_mode(mode, 500.0);
        cfg.t_bath = 1.0;
        const auto tr = simulate(mode, cfg);
        const auto spec = welch_psd(tr, 4096, 0.5, TraceChannel::Displacement);
        CHECK(spec.integrate(0.0, tr.sample_rate / 2) == doctest::Approx(variance(tr.x)).epsilon(0.02));
    }
}

TEST_CASE("rectangular window on a bin-centred tone") {
    const double fs = 1024.0;
    std::vector<double> x(8192);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::cos(kTwoPi * 64.0 * static_cast<double>(i) / fs);
    const auto spec = welch_psd(x, fs, 1024, 0.0, Window::Rectangular);
    // All power (A^2 / 2) lands in bin 64.
    CHECK(spec.psd[64] * spec.bin_width() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(spec.n_averages == 8);
}

TEST_CASE("averaging spectra") {
    const auto a = welch_psd(white_noise(4096, 1.0, 1), 100.0, 256, 0.5);
    const auto b = welch_psd(white_noise(4096, 1.0, 2), 100.0, 256, 0.5);
    const std::vector<Spectrum> both{a, b};
    const auto avg = average_spectra(both);
    CHECK(avg.n_averages == a.n_averages + b.n_averages);
    CHECK(avg.psd[5] == doctest::Approx(0.5 * (a.psd[5] + b.psd[5])));
    const auto c = welch_psd(white_noise(4096, 1.0, 2), 100.0, 512, 0.5);
    const std::vector<Spectrum> mismatched{a, c};
    CHECK_THROWS(average_spectra(mismatched));
}

TEST_CASE("bad Welch arguments") {
    const auto x = white_noise(100, 1.0, 1);
    CHECK_THROWS(welch_psd(x, 100.0, 256, 0.5));
    CHECK_THROWS(welch_psd(x, 100.0, 64, 1.0));
    CHECK_THROWS(welch_psd(x, 0.0, 64, 0.5));
}

TEST_CASE("default segment length") {
    // fs = 21.6 MHz, linewidth 530 Hz: bin <= 33 Hz -> 2^20
    CHECK(default_segment_length(21.6e6, 530.0, 1u << 24) == (1u << 20));
    CHECK(default_segment_length(21.6e6, 530.0, 1u << 20) == (1u << 18));
}

TEST_CASE("Lorentzian fit recovers the mechanical linewidth") {
    // A single 1000 / gamma record scatters the fitted width by ~6 %; four pooled records give ~3 %.
    const MechanicalMode mode;
    std::vector<Spectrum> spectra;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        auto cfg = SimulationConfig::for_mode(mode, 1000.0);
        cfg.t_bath = 1.0;
        cfg.seed = seed;
        const auto tr = simulate(mode, cfg);
        spectra.push_back(welch_psd(tr, default_segment_length(tr.sample_rate, mode.linewidth_hz(), tr.size()),
                                    0.5, TraceChannel::Displacement));
    }
    const auto spec = average_spectra(spectra);
    const auto fit = fit_lorentzian(spec, mode.frequency_hz(), mode.linewidth_hz());
    CHECK(fit.converged);
    CHECK(fit.fwhm == doctest::Approx(530.0).epsilon(0.10));
    CHECK(fit.center == doctest::Approx(1.35e6).epsilon(1e-5));
    const auto est = estimate_mode_temperature(spec, mode);
    CHECK(est.temperature == doctest::Approx(1.0).epsilon(0.10));
    CHECK(est.uncertainty > 0.0);
}

TEST_CASE("Lorentzian fit on a synthetic noiseless line") {
    Spectrum s;
    const double f0 = 1000.0, w = 20.0, area = 3.0, bg = 0.01;
    for (int k = 0; k < 4000; ++k) {
        const double f = 0.5 * k;
        s.frequencies.push_back(f);
        s.psd.push_back(bg + area * (w / (2.0 * kPi)) / ((f - f0) * (f - f0) + 0.25 * w * w));
    }
    s.n_averages = 10;
    const auto fit = fit_lorentzian(s, 990.0, 30.0);
    CHECK(fit.center == doctest::Approx(f0).epsilon(1e-6));
    CHECK(fit.fwhm == doctest::Approx(w).epsilon(1e-6));
    CHECK(fit.area == doctest::Approx(area).epsilon(1e-6));
    CHECK(fit.background == doctest::Approx(bg).epsilon(1e-6));
}

TEST_CASE("lock-in recovers amplitude and phase") {
    MechanicalMode mode;
    Trace tr;
    tr.sample_rate = 16.0 * mode.frequency_hz();
    const double a = 3.2e-13, phase = 0.7;
    const std::size_t n = 1 << 16;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / tr.sample_rate;
        const double v = a * std::cos(mode.omega_m * t + phase);
        tr.x.push_back(v);
        tr.x_measured.push_back(v);
        tr.force_applied.push_back(0.0);
    }
    const auto r = driven_response(tr, mode.frequency_hz(), mode, TraceChannel::Measured);
    CHECK(r.amplitude == doctest::Approx(a).epsilon(0.001));
    CHECK(r.phase == doctest::Approx(phase).epsilon(0.001));
    CHECK(std::abs(r.force) == doctest::Approx(a / std::abs(mode.susceptibility(mode.omega_m))).epsilon(0.001));
}

TEST_CASE("lock-in rejects broadband noise") {
    MechanicalMode mode;
    Trace tr;
    tr.sample_rate = 16.0 * mode.frequency_hz();
    const auto noise = white_noise(1 << 20, 1e-12, 3);
    const double a = 1e-13;
    for (std::size_t i = 0; i < noise.size(); ++i) {
        const double t = static_cast<double>(i) / tr.sample_rate;
        tr.x_measured.push_back(a * std::cos(mode.omega_m * t) + noise[i]);
    }
    tr.x = tr.x_measured;
    const auto r = driven_response(tr, mode.frequency_hz(), mode);
    CHECK(r.amplitude == doctest::Approx(a).epsilon(0.02));
}
