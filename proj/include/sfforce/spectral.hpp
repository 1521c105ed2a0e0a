#pragma once

#include "sfforce/dynamics.hpp"
#include "sfforce/mode.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sfforce {

enum class Window { Rectangular, Hann };

std::string to_string(Window window);

enum class TraceChannel {
    Displacement, // true motion (out-of-loop)
    Measured,     // motion plus imprecision noise (in-loop)
};

/// One-sided power spectral density. Integrating psd over frequency returns
/// the variance of the (segment-mean-removed) signal.
struct Spectrum {
    std::vector<double> frequencies; // Hz
    std::vector<double> psd;         // units^2 / Hz
    std::size_t n_averages = 0;
    Window window = Window::Hann;
    double resolution_bandwidth = 0.0; // Hz, equivalent noise bandwidth
    double record_duration = 0.0;      // s of data contributing

    double bin_width() const { return frequencies.size() > 1 ? frequencies[1] - frequencies[0] : 0.0; }

    /// Rectangle-rule integral of psd between f_lo and f_hi (inclusive bins).
    double integrate(double f_lo, double f_hi) const;

    /// Header comments carry window and averaging metadata.
    void write_csv(std::ostream& os) const;
};

/// Owns an FFTW plan and buffers for one transform length. Reuse across
/// welch_psd calls avoids re-planning; not shareable between threads.
class FftWorkspace {
public:
    explicit FftWorkspace(std::size_t length);
    ~FftWorkspace();
    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;

    std::size_t length() const { return length_; }
    // Transforms input() in place into power |X_k|^2 for k = 0..length/2.
    std::span<double> input();
    void power_spectrum(std::span<double> out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t length_;
};

/// Welch-averaged periodogram with per-segment mean removal.
/// Throws ArgumentError if segment_length exceeds the data or the overlap
/// is outside [0, 1).
Spectrum welch_psd(std::span<const double> samples, double sample_rate, std::size_t segment_length,
                   double overlap_fraction, Window window = Window::Hann,
                   FftWorkspace* workspace = nullptr);

Spectrum welch_psd(const Trace& trace, std::size_t segment_length, double overlap_fraction,
                   TraceChannel channel = TraceChannel::Measured, Window window = Window::Hann);

/// Bin-wise mean of spectra sharing one frequency grid.
Spectrum average_spectra(std::span<const Spectrum> spectra);

/// Smallest power of two whose bin width is at most linewidth / 16, capped
/// so at least four segments fit in n_samples.
std::size_t default_segment_length(double sample_rate, double linewidth_hz, std::size_t n_samples);

struct LorentzianFit {
    double center = 0.0;     // Hz
    double fwhm = 0.0;       // Hz
    double area = 0.0;       // units^2
    double background = 0.0; // units^2 / Hz
    // Parameter covariance, row-major, order (center, fwhm, area, background).
    std::array<double, 16> covariance{};
    double reduced_chi2 = 0.0;
    int iterations = 0;
    bool converged = false;

    double sigma(int i) const;
    double evaluate(double f) const;
};

/// Weighted least-squares fit of background + area-normalised Lorentzian
/// over center_guess +/- halfwidth_linewidths * fwhm_guess. The background
/// starts from the median of off-resonant bins. Throws EstimationError when
/// the window holds too few bins or the fit does not converge.
LorentzianFit fit_lorentzian(const Spectrum& spectrum, double center_guess, double fwhm_guess,
                             double halfwidth_linewidths = 20.0);

struct ModeTemperatureEstimate {
    double temperature = 0.0; // K
    double uncertainty = 0.0; // K, one standard deviation
    LorentzianFit fit;
};

/// T = m omega_m^2 <x^2> / k_B with <x^2> the fitted Lorentzian area.
/// The uncertainty is the statistical spread of the variance of a
/// narrow-band process of linewidth fwhm observed for record_duration:
/// T sqrt(2 / (2 pi fwhm * record_duration)).
/// A spectrum with no power above its background returns 0 K.
ModeTemperatureEstimate estimate_mode_temperature(const Spectrum& spectrum, const MechanicalMode& mode);

double mode_temperature_from_spectrum(const Spectrum& spectrum, const MechanicalMode& mode);

struct DrivenResponse {
    double amplitude = 0.0;        // m
    double phase = 0.0;            // rad, x = amplitude cos(w t + phase)
    double force_equivalent = 0.0; // N
    std::complex<double> displacement; // amplitude * e^{i phase}
    std::complex<double> force;        // displacement / susceptibility
};

/// Hann-windowed single-frequency lock-in. force_equivalent inverts the
/// open-loop susceptibility of `mode` at the drive frequency.
/// Throws ArgumentError above Nyquist or for fewer than 100 drive periods.
DrivenResponse driven_response(const Trace& trace, double drive_frequency_hz,
                               const MechanicalMode& mode,
                               TraceChannel channel = TraceChannel::Measured);

}  // namespace sfforce
