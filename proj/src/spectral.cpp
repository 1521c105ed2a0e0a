#include "sfforce/spectral.hpp"

#include "sfforce/constants.hpp"
#include "sfforce/errors.hpp"
#include "sfforce/result.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <ostream>

namespace sfforce {

namespace {

// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> make_window(Window window, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (window == Window::Hann) {
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
        }
    }
    return w;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

std::span<const double> channel_data(const Trace& trace, TraceChannel channel) {
    return channel == TraceChannel::Displacement ? std::span<const double>(trace.x)
                                                 : std::span<const double>(trace.x_measured);
}

}  // namespace

std::string to_string(Window window) {
    return window == Window::Hann ? "hann" : "rectangular";
}

double Spectrum::integrate(double f_lo, double f_hi) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (frequencies[i] >= f_lo && frequencies[i] <= f_hi) sum += psd[i];
    }
    return sum * bin_width();
}

void Spectrum::write_csv(std::ostream& os) const {
    os << "# window = " << to_string(window) << '\n'
       << "# n_averages = " << n_averages << '\n'
       << "# resolution_bandwidth_Hz = " << format_double(resolution_bandwidth) << '\n'
       << "# record_duration_s = " << format_double(record_duration) << '\n'
       << "frequency[Hz],psd[m^2/Hz]\n";
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        os << format_double(frequencies[i]) << ',' << format_double(psd[i]) << '\n';
    }
}

struct FftWorkspace::Impl {
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;
};

FftWorkspace::FftWorkspace(std::size_t length) : impl_(std::make_unique<Impl>()), length_(length) {
    if (length < 2) throw ArgumentError("FftWorkspace: length must be >= 2");
    std::lock_guard lock(planner_mutex());
    impl_->in = fftw_alloc_real(length);
    impl_->out = fftw_alloc_complex(length / 2 + 1);
    impl_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(length), impl_->in, impl_->out, FFTW_ESTIMATE);
    if (!impl_->plan) throw Error("FftWorkspace: FFTW planning failed");
}

FftWorkspace::~FftWorkspace() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(impl_->plan);
    fftw_free(impl_->in);
    fftw_free(impl_->out);
}

std::span<double> FftWorkspace::input() { return {impl_->in, length_}; }

void FftWorkspace::power_spectrum(std::span<double> out) {
    fftw_execute(impl_->plan);
    const std::size_t n = std::min(out.size(), length_ / 2 + 1);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = impl_->out[k][0] * impl_->out[k][0] + impl_->out[k][1] * impl_->out[k][1];
    }
}

Spectrum welch_psd(std::span<const double> samples, double sample_rate, std::size_t segment_length,
                   double overlap_fraction, Window window, FftWorkspace* workspace) {
    if (!(sample_rate > 0.0)) throw ArgumentError("welch_psd: sample_rate must be > 0");
    if (segment_length < 2) throw ArgumentError("welch_psd: segment_length must be >= 2");
    if (segment_length > samples.size()) {
        throw ArgumentError("welch_psd: segment_length " + std::to_string(segment_length) +
                            " exceeds trace length " + std::to_string(samples.size()));
    }
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
        throw ArgumentError("welch_psd: overlap_fraction must lie in [0, 1)");
    }

    std::unique_ptr<FftWorkspace> owned;
    if (!workspace || workspace->length() != segment_length) {
        owned = std::make_unique<FftWorkspace>(segment_length);
        workspace = owned.get();
    }

    const std::size_t n = segment_length;
    const std::size_t n_freq = n / 2 + 1;
    const auto overlap = static_cast<std::size_t>(std::floor(overlap_fraction * static_cast<double>(n)));
    const std::size_t hop = std::max<std::size_t>(1, n - overlap);
    const auto w = make_window(window, n);
    const double sum_w = std::accumulate(w.begin(), w.end(), 0.0);
    const double sum_w2 = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);

    std::vector<double> acc(n_freq, 0.0);
    std::vector<double> power(n_freq);
    std::size_t segments = 0;
    for (std::size_t start = 0; start + n <= samples.size(); start += hop) {
        const auto seg = samples.subspan(start, n);
        const double mean = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(n);
        auto in = workspace->input();
        for (std::size_t i = 0; i < n; ++i) in[i] = (seg[i] - mean) * w[i];
        workspace->power_spectrum(power);
        for (std::size_t k = 0; k < n_freq; ++k) acc[k] += power[k];
        ++segments;
    }

    Spectrum s;
    s.window = window;
    s.n_averages = segments;
    s.resolution_bandwidth = sample_rate * sum_w2 / (sum_w * sum_w);
    s.record_duration = static_cast<double>(samples.size()) / sample_rate;
    s.frequencies.resize(n_freq);
    s.psd.resize(n_freq);
    const double scale = 1.0 / (sample_rate * sum_w2 * static_cast<double>(segments));
    for (std::size_t k = 0; k < n_freq; ++k) {
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        s.frequencies[k] = static_cast<double>(k) * sample_rate / static_cast<double>(n);
        s.psd[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
    }
    return s;
}

Spectrum welch_psd(const Trace& trace, std::size_t segment_length, double overlap_fraction,
                   TraceChannel channel, Window window) {
    return welch_psd(channel_data(trace, channel), trace.sample_rate, segment_length,
                     overlap_fraction, window);
}

Spectrum average_spectra(std::span<const Spectrum> spectra) {
    if (spectra.empty()) throw ArgumentError("average_spectra: no spectra");
    Spectrum out = spectra.front();
    std::fill(out.psd.begin(), out.psd.end(), 0.0);
    out.n_averages = 0;
    out.record_duration = 0.0;
    for (const auto& s : spectra) {
        if (s.frequencies != out.frequencies || s.window != out.window) {
            throw ArgumentError("average_spectra: spectra do not share a grid and window");
        }
        for (std::size_t i = 0; i < out.psd.size(); ++i) out.psd[i] += s.psd[i];
        out.n_averages += s.n_averages;
        out.record_duration += s.record_duration;
    }
    for (double& p : out.psd) p /= static_cast<double>(spectra.size());
    return out;
}

std::size_t default_segment_length(double sample_rate, double linewidth_hz, std::size_t n_samples) {
    std::size_t n = 64;
    while (sample_rate / static_cast<double>(n) > linewidth_hz / 16.0) n *= 2;
    while (n > 64 && 4 * n > n_samples) n /= 2;
    return n;
}

double LorentzianFit::sigma(int i) const {
    return std::sqrt(std::max(covariance[static_cast<std::size_t>(5 * i)], 0.0));
}

double LorentzianFit::evaluate(double f) const {
    const double d = f - center;
    return background + area * (fwhm / kTwoPi) / (d * d + 0.25 * fwhm * fwhm);
}

LorentzianFit fit_lorentzian(const Spectrum& spectrum, double center_guess, double fwhm_guess,
                             double halfwidth_linewidths) {
    if (!(fwhm_guess > 0.0)) throw EstimationError("fit_lorentzian: fwhm guess must be > 0");
    const double half = halfwidth_linewidths * fwhm_guess;
    std::vector<double> f, y;
    for (std::size_t i = 0; i < spectrum.frequencies.size(); ++i) {
        const double fi = spectrum.frequencies[i];
        if (fi > 0.0 && std::abs(fi - center_guess) <= half) {
            f.push_back(fi);
            y.push_back(spectrum.psd[i]);
        }
    }
    if (f.size() < 8) {
        throw EstimationError("fit_lorentzian: only " + std::to_string(f.size()) +
                              " bins inside the fit window");
    }
    if (f.back() - f.front() < 10.0 * fwhm_guess) {
        throw EstimationError("fit_lorentzian: spectrum spans fewer than 10 linewidths around the resonance");
    }

    // Starting point.
    const auto peak_it = std::max_element(y.begin(), y.end());
    const auto peak = static_cast<std::size_t>(peak_it - y.begin());
    double f0 = f[peak];
    std::vector<double> off;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (std::abs(f[i] - f0) > 5.0 * fwhm_guess) off.push_back(y[i]);
    }
    double bg = std::max(median(off), 0.0);
    const double height = y[peak] - bg;
    if (!(height > 0.0)) throw EstimationError("fit_lorentzian: no peak above background");
    double width = fwhm_guess;
    {
        std::size_t lo = peak, hi = peak;
        while (lo > 0 && y[lo] - bg > 0.5 * height) --lo;
        while (hi + 1 < y.size() && y[hi] - bg > 0.5 * height) ++hi;
        const double measured = f[hi] - f[lo];
        if (measured > 0.0 && measured < 4.0 * fwhm_guess) width = std::max(measured, f[1] - f[0]);
    }
    double area = height * kPi * width / 2.0;

    using Vec4 = Eigen::Matrix<double, 4, 1>;
    using Mat4 = Eigen::Matrix<double, 4, 4>;
    // Parameters: centre, log width, area, background. Weights come from the
    // current model (PSD bins scatter in proportion to their mean).
    Vec4 p(f0, std::log(width), area, bg);
    const double area_scale = std::max(std::abs(area), 1e-300);
    const double bg_scale = std::max(y[peak], 1e-300);

    auto model = [&](const Vec4& q, double fi) {
        const double w = std::exp(q[1]);
        const double d = fi - q[0];
        return q[3] + q[2] * (w / kTwoPi) / (d * d + 0.25 * w * w);
    };
    auto cost = [&](const Vec4& q, const std::vector<double>& sig) {
        double c = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double r = (y[i] - model(q, f[i])) / sig[i];
            c += r * r;
        }
        return c;
    };

    std::vector<double> sig(f.size());
    auto update_weights = [&](const Vec4& q) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            sig[i] = std::max(std::abs(model(q, f[i])), 1e-12 * bg_scale);
        }
    };

    LorentzianFit out;
    double lambda = 1e-3;
    Mat4 jtj = Mat4::Zero();
    for (int outer = 0; outer < 6; ++outer) {
        update_weights(p);
        double c = cost(p, sig);
        for (int it = 0; it < 200; ++it) {
            ++out.iterations;
            jtj.setZero();
            Vec4 jtr = Vec4::Zero();
            const double w = std::exp(p[1]);
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double d = f[i] - p[0];
                const double den = d * d + 0.25 * w * w;
                const double shape = (w / kTwoPi) / den;
                Vec4 j;
                j[0] = p[2] * (w / kTwoPi) * 2.0 * d / (den * den);
                j[1] = p[2] * (w / kTwoPi) * (1.0 / den - 0.5 * w * w / (den * den));
                j[2] = shape;
                j[3] = 1.0;
                j /= sig[i];
                const double r = (y[i] - model(p, f[i])) / sig[i];
                jtj += j * j.transpose();
                jtr += j * r;
            }
            Mat4 a = jtj;
            for (int k = 0; k < 4; ++k) a(k, k) *= 1.0 + lambda;
            const Vec4 step = a.ldlt().solve(jtr);
            Vec4 trial = p + step;
            const double ct = cost(trial, sig);
            if (std::isfinite(ct) && ct < c) {
                const bool small = std::abs(step[0]) < 1e-9 * w && std::abs(step[1]) < 1e-9 &&
                                   std::abs(step[2]) < 1e-9 * area_scale &&
                                   std::abs(step[3]) < 1e-9 * bg_scale;
                p = trial;
                c = ct;
                lambda = std::max(lambda * 0.3, 1e-12);
                if (small) {
                    out.converged = true;
                    break;
                }
            } else {
                lambda *= 10.0;
                if (lambda > 1e12) {
                    out.converged = (c - ct) <= 1e-12 * c || !std::isfinite(ct);
                    break;
                }
            }
        }
        if (!p.allFinite()) break;
    }
    if (!p.allFinite() || !out.converged) {
        throw EstimationError("fit_lorentzian: did not converge after " +
                              std::to_string(out.iterations) + " iterations (centre " +
                              format_double(p[0]) + " Hz, fwhm " + format_double(std::exp(p[1])) +
                              " Hz, area " + format_double(p[2]) + ")");
    }

    update_weights(p);
    const double chi2 = cost(p, sig);
    const auto dof = static_cast<double>(f.size()) - 4.0;
    out.reduced_chi2 = chi2 / dof;
    out.center = p[0];
    out.fwhm = std::exp(p[1]);
    out.area = p[2];
    out.background = p[3];

    // Covariance in (centre, fwhm, area, background); d fwhm = fwhm d log fwhm.
    Mat4 cov = jtj.inverse() * out.reduced_chi2;
    Mat4 jac = Mat4::Identity();
    jac(1, 1) = out.fwhm;
    cov = jac * cov * jac.transpose();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out.covariance[static_cast<std::size_t>(4 * r + c)] = cov(r, c);
    return out;
}

ModeTemperatureEstimate estimate_mode_temperature(const Spectrum& spectrum, const MechanicalMode& mode) {
    ModeTemperatureEstimate est;
    const double f_mode = mode.frequency_hz();
    const double lw = mode.linewidth_hz();
    const double half = 5.0 * lw;
    if (spectrum.frequencies.empty() || spectrum.frequencies.back() < f_mode + half ||
        spectrum.frequencies.front() > f_mode - half) {
        throw EstimationError("mode temperature: spectrum does not cover 10 linewidths around the mode");
    }
    // No excess power near the resonance: nothing to fit.
    double peak = 0.0;
    std::vector<double> near;
    for (std::size_t i = 0; i < spectrum.frequencies.size(); ++i) {
        if (std::abs(spectrum.frequencies[i] - f_mode) <= 20.0 * lw) {
            peak = std::max(peak, spectrum.psd[i]);
            near.push_back(spectrum.psd[i]);
        }
    }
    if (peak <= median(near)) return est;

    // The resonance may be broadened (feedback); widen the initial guess
    // from the spectrum itself.
    double width = lw;
    {
        const double bg = median(near);
        std::size_t ipk = 0;
        for (std::size_t i = 0; i < spectrum.frequencies.size(); ++i) {
            if (std::abs(spectrum.frequencies[i] - f_mode) <= 20.0 * lw && spectrum.psd[i] == peak) ipk = i;
        }
        std::size_t lo = ipk, hi = ipk;
        while (lo > 0 && spectrum.psd[lo] - bg > 0.5 * (peak - bg)) --lo;
        while (hi + 1 < spectrum.psd.size() && spectrum.psd[hi] - bg > 0.5 * (peak - bg)) ++hi;
        width = std::max(lw, spectrum.frequencies[hi] - spectrum.frequencies[lo]);
    }

    est.fit = fit_lorentzian(spectrum, f_mode, width);
    if (!(est.fit.area > 0.0)) {
        throw EstimationError("mode temperature: fitted area " + format_double(est.fit.area) +
                              " m^2 is not positive (fwhm " + format_double(est.fit.fwhm) + " Hz)");
    }
    est.temperature = mode.mass_eff * mode.omega_m * mode.omega_m * est.fit.area / kConstants.k_b;
    const double samples = kTwoPi * est.fit.fwhm * spectrum.record_duration;
    est.uncertainty = samples > 0.0 ? est.temperature * std::sqrt(2.0 / samples) : 0.0;
    return est;
}

double mode_temperature_from_spectrum(const Spectrum& spectrum, const MechanicalMode& mode) {
    return estimate_mode_temperature(spectrum, mode).temperature;
}

DrivenResponse driven_response(const Trace& trace, double drive_frequency_hz,
                               const MechanicalMode& mode, TraceChannel channel) {
    const auto data = channel_data(trace, channel);
    if (!(drive_frequency_hz > 0.0 && drive_frequency_hz < 0.5 * trace.sample_rate)) {
        throw ArgumentError("driven_response: drive frequency must lie in (0, Nyquist)");
    }
    if (trace.duration() * drive_frequency_hz < 100.0) {
        throw ArgumentError("driven_response: trace covers fewer than 100 drive periods");
    }
    const std::size_t n = data.size();
    const double w_step = kTwoPi * drive_frequency_hz / trace.sample_rate;
    std::complex<double> acc(0.0, 0.0);
    double sum_w = 0.0;
    std::complex<double> ref(1.0, 0.0);
    const std::complex<double> rot = std::polar(1.0, -w_step);
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 4096 == 0) ref = std::polar(1.0, -w_step * static_cast<double>(i));
        const double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
        acc += w * data[i] * ref;
        sum_w += w;
        ref *= rot;
    }
    DrivenResponse r;
    r.displacement = 2.0 * acc / sum_w;
    r.amplitude = std::abs(r.displacement);
    r.phase = std::arg(r.displacement);
    r.force = r.displacement / mode.susceptibility(kTwoPi * drive_frequency_hz);
    r.force_equivalent = std::abs(r.force);
    return r;
}

}  // namespace sfforce
