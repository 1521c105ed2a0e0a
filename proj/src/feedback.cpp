#include "sfforce/feedback.hpp"

#include "sfforce/errors.hpp"
#include "sfforce/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sfforce {

namespace {

double noise_temperature_scale(const MechanicalMode& mode, double s_imp) {
    return mode.mass_eff * mode.omega_m * mode.omega_m * mode.gamma_m * s_imp /
           (4.0 * kConstants.k_b);
}

double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double mean_square(std::span<const double> v, double mean) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size());
}

double mean_square(std::span<const double> v) { return mean_square(v, mean_of(v)); }

// K per m^2 of displacement variance.
double variance_to_temperature(const MechanicalMode& mode) {
    return mode.mass_eff * mode.omega_m * mode.omega_m / kConstants.k_b;
}

// Midpoint rule in theta with f = f0 + h tan(theta): the Lorentzian core is
// sampled densely and the tails out to f_hi cost few points.
template <class F>
double lorentzian_quadrature(double f0, double h, double f_lo, double f_hi, F&& integrand) {
    constexpr int n = 200000;
    const double t_lo = std::atan((f_lo - f0) / h);
    const double t_hi = std::atan((f_hi - f0) / h);
    const double dt = (t_hi - t_lo) / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = t_lo + (i + 0.5) * dt;
        const double c = std::cos(t);
        sum += integrand(f0 + h * std::tan(t)) * h / (c * c);
    }
    return sum * dt;
}

}  // namespace

PredictedTemperature predicted_temperature(double gain, double t_bath, const MechanicalMode& mode,
                                           double measurement_noise_psd) {
    if (!(gain >= 0.0)) throw DomainError("predicted_temperature: gain must be >= 0");
    if (!(t_bath >= 0.0)) throw DomainError("predicted_temperature: bath temperature must be >= 0 K");
    if (!(measurement_noise_psd >= 0.0)) {
        throw DomainError("predicted_temperature: measurement noise PSD must be >= 0");
    }
    const double k = noise_temperature_scale(mode, measurement_noise_psd);
    const double damped = t_bath / (1.0 + gain);
    return {damped + k * gain * gain / (1.0 + gain),
            damped - k * (gain * gain + 2.0 * gain) / (1.0 + gain)};
}

double optimal_gain(double t_bath, const MechanicalMode& mode, double measurement_noise_psd) {
    const double k = noise_temperature_scale(mode, measurement_noise_psd);
    if (k <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(1.0 + t_bath / k) - 1.0;
}

double phonon_occupancy(double temperature, const MechanicalMode& mode, OccupancyForm form) {
    if (!(temperature >= 0.0)) throw DomainError("phonon_occupancy: temperature must be >= 0 K");
    if (temperature == 0.0) return 0.0;
    const double quantum = kConstants.hbar * mode.omega_m;
    const double thermal = kConstants.k_b * temperature;
    if (form == OccupancyForm::Bose) return 1.0 / std::expm1(quantum / thermal);
    return std::max(thermal / quantum - 0.5, 0.0);
}

ClosedLoopTemperature closed_loop_temperature(const FeedbackController& controller,
                                              const MechanicalMode& mode, double t_bath,
                                              double measurement_noise_psd, double dt,
                                              double inloop_halfwidth_hz) {
    if (!(t_bath >= 0.0)) throw DomainError("closed_loop_temperature: bath temperature must be >= 0 K");
    if (!(measurement_noise_psd >= 0.0)) {
        throw DomainError("closed_loop_temperature: measurement noise PSD must be >= 0");
    }
    if (!(inloop_halfwidth_hz > 0.0)) {
        throw DomainError("closed_loop_temperature: in-loop half-width must be > 0");
    }
    const FeedbackLoop loop(controller, mode, dt);
    const double s_force = 4.0 * kConstants.k_b * t_bath * mode.mass_eff * mode.gamma_m;
    const double s_imp = measurement_noise_psd;
    const double f0 = mode.frequency_hz();
    const double h = 0.5 * mode.linewidth_hz();
    const double nyquist = 0.5 / dt;

    auto spectra = [&](double f) {
        const double w = kTwoPi * f;
        const auto chi = mode.susceptibility(w);
        const auto c = loop.response(w);
        const double open = std::norm(1.0 - chi * c);
        const double thermal = std::norm(chi) * s_force;
        return std::pair{(thermal + std::norm(chi * c) * s_imp) / open, (thermal + s_imp) / open - s_imp};
    };
    const double scale = variance_to_temperature(mode);
    ClosedLoopTemperature out;
    out.t_outofloop = scale * lorentzian_quadrature(f0, h, 0.0, nyquist,
                                                    [&](double f) { return spectra(f).first; });
    out.t_inloop = scale * lorentzian_quadrature(f0, h, std::max(f0 - inloop_halfwidth_hz, 0.0),
                                                 std::min(f0 + inloop_halfwidth_hz, nyquist),
                                                 [&](double f) { return spectra(f).second; });
    return out;
}

std::vector<CoolingCurvePoint> cooling_curve(std::span<const double> gains, const MechanicalMode& mode,
                                             const FeedbackController& controller_template,
                                             const SimulationConfig& config,
                                             const CoolingCurveOptions& options) {
    if (!std::is_sorted(gains.begin(), gains.end())) {
        throw ArgumentError("cooling_curve: gains must be sorted ascending");
    }
    if (options.runs_per_point < 1) throw ArgumentError("cooling_curve: runs_per_point must be >= 1");
    if (options.blocks_per_run < 2) throw ArgumentError("cooling_curve: blocks_per_run must be >= 2");
    const std::size_t runs = static_cast<std::size_t>(options.runs_per_point);
    const std::size_t n_tasks = gains.size() * runs;
    const auto blocks = static_cast<std::size_t>(options.blocks_per_run);
    const double halfwidth =
        options.inloop_halfwidth > 0.0 ? options.inloop_halfwidth : controller_template.bandpass_fwhm;

    struct RunOutput {
        std::vector<double> block_ms; // displacement mean square per block
        Spectrum inloop;
        bool stable = true;
        std::string diagnostic;
    };

    auto run = [&](std::size_t task) -> RunOutput {
        const std::size_t point = task / runs;
        const std::size_t rep = task % runs;
        FeedbackController controller = controller_template;
        controller.gain = gains[point];
        SimulationConfig cfg = config;
        cfg.seed = config.seed + 1000003ULL * point + 7919ULL * rep;

        RunOutput out;
        Trace trace;
        try {
            trace = simulate(mode, cfg, {}, {}, &controller);
        } catch (const IntegratorFault& e) {
            out.stable = false;
            out.diagnostic = e.what();
            return out;
        }
        const std::span<const double> x(trace.x);
        const std::size_t q = x.size() / 4;
        const double early = mean_square(x.first(q));
        const double late = mean_square(x.last(q));
        if (!(late <= 100.0 * early)) {
            out.stable = false;
            out.diagnostic = "trace variance grew by " + std::to_string(late / early) + "x";
            return out;
        }
        const double mean = mean_of(x);
        const std::size_t len = x.size() / blocks;
        for (std::size_t b = 0; b < blocks; ++b) out.block_ms.push_back(mean_square(x.subspan(b * len, len), mean));
        const std::size_t seg = options.segment_length
                                    ? options.segment_length
                                    : default_segment_length(trace.sample_rate, mode.linewidth_hz(),
                                                             trace.size());
        out.inloop = welch_psd(trace, seg, options.overlap_fraction, TraceChannel::Measured);
        return out;
    };
    const auto outputs =
        parallel_map<RunOutput>(n_tasks, std::function<RunOutput(std::size_t)>(run), options.workers);

    const double scale = variance_to_temperature(mode);
    const double f0 = mode.frequency_hz();
    const double floor_lo = 10.0 * controller_template.bandpass_fwhm;
    const double floor_hi = 40.0 * controller_template.bandpass_fwhm;

    std::vector<CoolingCurvePoint> points(gains.size());
    for (std::size_t i = 0; i < gains.size(); ++i) {
        auto& p = points[i];
        p.gain = gains[i];
        p.predicted = predicted_temperature(p.gain, config.t_bath, mode, config.measurement_noise_psd);
        FeedbackController controller = controller_template;
        controller.gain = p.gain;
        p.closed_loop = closed_loop_temperature(controller, mode, config.t_bath,
                                                config.measurement_noise_psd, config.dt, halfwidth);

        std::vector<double> block_t;
        std::vector<Spectrum> inner;
        for (std::size_t r = 0; r < runs; ++r) {
            const auto& o = outputs[i * runs + r];
            if (!o.stable) {
                p.stable = false;
                p.diagnostic = o.diagnostic;
                break;
            }
            for (double ms : o.block_ms) block_t.push_back(scale * ms);
            inner.push_back(o.inloop);
        }
        if (!p.stable) continue;

        const double nb = static_cast<double>(block_t.size());
        p.t_outofloop = mean_of(block_t);
        p.t_outofloop_sigma = std::sqrt(mean_square(block_t, p.t_outofloop) * nb / (nb - 1.0) / nb);

        const auto spec = average_spectra(inner);
        double floor_sum = 0.0;
        std::size_t floor_n = 0;
        for (std::size_t k = 0; k < spec.psd.size(); ++k) {
            const double d = std::abs(spec.frequencies[k] - f0);
            if (d >= floor_lo && d <= floor_hi) {
                floor_sum += spec.psd[k];
                ++floor_n;
            }
        }
        if (floor_n == 0) {
            p.stable = false;
            p.diagnostic = "no spectrum bins in the imprecision-floor band";
            continue;
        }
        const double floor = floor_sum / static_cast<double>(floor_n);
        const double df = spec.frequencies.size() > 1 ? spec.frequencies[1] - spec.frequencies[0] : 0.0;
        double area = 0.0, var = 0.0;
        for (std::size_t k = 0; k < spec.psd.size(); ++k) {
            if (std::abs(spec.frequencies[k] - f0) < halfwidth) {
                area += (spec.psd[k] - floor) * df;
                var += spec.psd[k] * spec.psd[k] * df * df;
            }
        }
        p.t_inloop = scale * area;
        p.t_inloop_sigma = scale * std::sqrt(var / static_cast<double>(std::max<std::size_t>(spec.n_averages, 1)));
        p.phonon_occupancy = phonon_occupancy(p.t_outofloop, mode);
    }
    return points;
}

}  // namespace sfforce
