#include "sfforce/dynamics.hpp"

#include "sfforce/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>

namespace sfforce {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Exact one-step map of the damped oscillator and the Cholesky factor of
// the thermal noise it accumulates over the step.
struct Propagator {
    double p11, p12, p21, p22;
    double l11 = 0.0, l21 = 0.0, l22 = 0.0;

    Propagator(const MechanicalMode& mode, double dt, double t_bath) {
        const long double w = mode.omega_m;
        const long double gamma = 0.5L * mode.gamma_m;
        const long double wd = std::sqrt(w * w - gamma * gamma);
        const long double decay = std::exp(-gamma * dt);
        const long double c = std::cos(wd * dt);
        const long double s = std::sin(wd * dt);
        const long double q11 = decay * (c + gamma / wd * s);
        const long double q12 = decay * s / wd;
        const long double q21 = -decay * w * w / wd * s;
        const long double q22 = decay * (c - gamma / wd * s);
        p11 = static_cast<double>(q11);
        p12 = static_cast<double>(q12);
        p21 = static_cast<double>(q21);
        p22 = static_cast<double>(q22);

        if (t_bath > 0.0) {
            // Q = S - P S P^T with S the equilibrium covariance.
            const long double kt = static_cast<long double>(kConstants.k_b) * t_bath;
            const long double sx = kt / (mode.mass_eff * w * w);
            const long double sv = kt / mode.mass_eff;
            const long double c11 = sx - (q11 * q11 * sx + q12 * q12 * sv);
            const long double c12 = -(q11 * q21 * sx + q12 * q22 * sv);
            const long double c22 = sv - (q21 * q21 * sx + q22 * q22 * sv);
            const long double a = std::sqrt(std::max(c11, 0.0L));
            const long double b = a > 0.0L ? c12 / a : 0.0L;
            l11 = static_cast<double>(a);
            l21 = static_cast<double>(b);
            l22 = static_cast<double>(std::sqrt(std::max(c22 - b * b, 0.0L)));
        }
    }
};

}  // namespace

SimulationConfig SimulationConfig::for_mode(const MechanicalMode& mode, double relaxation_times,
                                            int steps_per_period, int output_stride) {
    SimulationConfig c;
    c.dt = kTwoPi / (mode.omega_m * steps_per_period);
    c.duration = relaxation_times / mode.gamma_m;
    c.output_stride = output_stride;
    return c;
}

std::vector<std::string> SimulationConfig::violations(const MechanicalMode& mode) const {
    std::vector<std::string> out;
    if (!(dt > 0.0)) {
        out.emplace_back("dt must be > 0");
        return out;
    }
    if (!(dt * mode.omega_m < 0.1)) out.emplace_back("dt * omega_m must be < 0.1");
    if (output_stride < 1) {
        out.emplace_back("output_stride must be >= 1");
        return out;
    }
    const double per_period = kTwoPi / (mode.omega_m * dt * output_stride);
    if (per_period < 16.0) out.emplace_back("stored trace needs >= 16 samples per mechanical period");
    if (!(duration >= dt * output_stride)) out.emplace_back("duration shorter than one output sample");
    if (!(t_bath >= 0.0)) out.emplace_back("t_bath must be >= 0");
    if (!(measurement_noise_psd >= 0.0)) out.emplace_back("measurement_noise_psd must be >= 0");
    if (!(superfluid_cutoff > 0.0)) out.emplace_back("superfluid_cutoff must be > 0");
    if (superfluid_filter_order < 1) out.emplace_back("superfluid_filter_order must be >= 1");
    if (drive) {
        if (!(drive->frequency >= 0.0)) out.emplace_back("drive frequency must be >= 0");
        if (!(drive->frequency * dt * output_stride < kPi)) {
            out.emplace_back("drive frequency above the trace Nyquist frequency");
        }
        if (!(drive->modulation_depth >= 0.0)) out.emplace_back("drive modulation_depth must be >= 0");
        if (!(drive->carrier_power >= 0.0)) out.emplace_back("drive carrier_power must be >= 0");
    }
    return out;
}

double thermal_force_psd(double t_bath, const MechanicalMode& mode) {
    if (!(t_bath >= 0.0)) throw DomainError("thermal_force_psd: temperature must be >= 0 K");
    return 4.0 * kConstants.k_b * t_bath * mode.mass_eff * mode.gamma_m;
}

std::complex<double> drive_force_phasor(const MechanicalMode& mode, const SimulationConfig& config,
                                        const ForceBreakdown& forces, const FilmState& film) {
    if (!config.drive) return {0.0, 0.0};
    const auto& d = *config.drive;
    std::complex<double> f = modal_force(forces.f_radiation, mode);
    if (film.present) {
        f += superfluid_response_gain(d.frequency, config.superfluid_cutoff,
                                      config.superfluid_filter_order) *
             forces.f_superfluid_modal;
    }
    return d.modulation_depth * f;
}

double shot_noise_imprecision_psd(const MechanicalMode& mode, double kappa, double n_cav,
                                  double detection_efficiency) {
    if (!(kappa > 0.0 && n_cav > 0.0 && detection_efficiency > 0.0 && detection_efficiency <= 1.0)) {
        throw DomainError("shot_noise_imprecision_psd: need kappa > 0, n_cav > 0, 0 < efficiency <= 1");
    }
    const double xz = mode.x_zpf();
    return xz * xz * kappa / (8.0 * detection_efficiency * n_cav * mode.g0 * mode.g0);
}

Trace simulate(const MechanicalMode& mode, const SimulationConfig& config,
               const ForceBreakdown& forces, const FilmState& film,
               const FeedbackController* controller) {
    validate(mode);
    {
        const auto v = config.violations(mode);
        if (!v.empty()) {
            std::string msg = "invalid simulation config:";
            for (const auto& s : v) msg += " " + s + ";";
            throw ConfigurationError(msg);
        }
    }

    const double dt = config.dt;
    const auto stride = static_cast<std::size_t>(config.output_stride);
    const auto n_steps = static_cast<std::size_t>(std::llround(config.duration / dt));
    const std::size_t n_out = n_steps / stride;

    const Propagator prop(mode, dt, config.t_bath);
    const double stiffness = mode.mass_eff * mode.omega_m * mode.omega_m;

    std::mt19937_64 thermal_rng(splitmix64(config.seed));
    std::mt19937_64 meas_rng(splitmix64(config.seed ^ 0x6d656173756e6f69ULL));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::normal_distribution<double> meas_normal(0.0, 1.0);

    // Imprecision noise at the internal rate: one-sided PSD S -> variance S fs / 2.
    const double sigma_meas = std::sqrt(config.measurement_noise_psd / (2.0 * dt));
    const bool has_noise = sigma_meas > 0.0;

    // Coherent drive: x_d(t) = Re[X e^{i w t}], F_d(t) = Re[F e^{i w t}].
    const std::complex<double> f_drive = drive_force_phasor(mode, config, forces, film);
    const bool has_drive = config.drive && std::abs(f_drive) > 0.0;
    const double w_drive = config.drive ? config.drive->frequency : 0.0;
    const std::complex<double> x_drive = mode.susceptibility(w_drive) * f_drive;
    const std::complex<double> rot = std::polar(1.0, w_drive * dt);
    std::complex<double> phase(1.0, 0.0);

    std::optional<FeedbackLoop> loop;
    if (controller) loop.emplace(*controller, mode, dt);

    double x = 0.0;
    double v = 0.0;
    if (!config.start_at_rest && config.t_bath > 0.0) {
        x = std::sqrt(mode.thermal_variance(config.t_bath)) * normal(thermal_rng);
        v = std::sqrt(kConstants.k_b * config.t_bath / mode.mass_eff) * normal(thermal_rng);
    }

    Trace trace;
    trace.sample_rate = config.sample_rate();
    trace.x.reserve(n_out);
    trace.x_measured.reserve(n_out);
    trace.force_applied.reserve(n_out);

    double noise_sum = 0.0;
    for (std::size_t step = 0; step < n_out * stride; ++step) {
        if (has_drive && step % 4096 == 0) {
            phase = std::polar(1.0, w_drive * dt * static_cast<double>(step));
        }
        const double x_total = has_drive ? x + (x_drive * phase).real() : x;
        const double noise = has_noise ? sigma_meas * meas_normal(meas_rng) : 0.0;
        const double f_fb = loop ? loop->update(x_total + noise) : 0.0;

        const std::size_t in_block = step % stride;
        if (in_block == 0) {
            if (!std::isfinite(x_total) || !std::isfinite(v)) {
                throw IntegratorFault(step, "non-finite oscillator state");
            }
            trace.x.push_back(x_total);
            trace.force_applied.push_back((has_drive ? (f_drive * phase).real() : 0.0) + f_fb);
            noise_sum = 0.0;
        }
        noise_sum += noise;
        if (in_block == stride - 1) {
            trace.x_measured.push_back(trace.x.back() + noise_sum / static_cast<double>(stride));
        }

        // Exact step about the shifted equilibrium of the held feedback force.
        const double x_eq = f_fb / stiffness;
        const double dx = x - x_eq;
        double x_next = x_eq + prop.p11 * dx + prop.p12 * v;
        double v_next = prop.p21 * dx + prop.p22 * v;
        if (config.t_bath > 0.0) {
            const double n1 = normal(thermal_rng);
            const double n2 = normal(thermal_rng);
            x_next += prop.l11 * n1;
            v_next += prop.l21 * n1 + prop.l22 * n2;
        }
        x = x_next;
        v = v_next;
        if (has_drive) phase *= rot;
    }
    return trace;
}

}  // namespace sfforce
