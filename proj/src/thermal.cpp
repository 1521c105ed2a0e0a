#include "sfforce/thermal.hpp"

#include "sfforce/errors.hpp"

#include <cmath>

namespace sfforce {

std::vector<std::string> ThermalModel::violations() const {
    std::vector<std::string> out;
    if (!(conductance_coefficient > 0.0)) out.emplace_back("conductance_coefficient must be > 0");
    if (!(conductance_exponent >= 1.0)) out.emplace_back("conductance_exponent must be >= 1");
    if (!(parasitic_load >= 0.0)) out.emplace_back("parasitic_load must be >= 0");
    if (!(no_film_temperature > 0.0)) out.emplace_back("no_film_temperature must be > 0");
    return out;
}

void validate(const ThermalModel& model) {
    const auto v = model.violations();
    if (v.empty()) return;
    std::string msg = "invalid thermal model:";
    for (const auto& s : v) msg += " " + s + ";";
    throw ConfigurationError(msg);
}

ThermalModel calibrate_thermal_model(double t_cryostat, std::span<const ThermalAnchor, 3> anchors,
                                     double no_film_temperature) {
    const auto& [p1, t1] = anchors[0];
    const auto& [p2, t2] = anchors[1];
    const auto& [p3, t3] = anchors[2];
    if (!(p1 < p2 && p2 < p3 && t_cryostat < t1 && t1 < t2 && t2 < t3)) {
        throw ConfigurationError("calibrate_thermal_model: anchors must ascend in power and temperature");
    }
    // Differences of T^n between consecutive anchors must scale with the
    // power differences; this fixes n independently of a and the load.
    const double target = (p3 - p2) / (p2 - p1);
    auto mismatch = [&](double n) {
        const double u1 = std::pow(t1, n), u2 = std::pow(t2, n), u3 = std::pow(t3, n);
        return std::log((u3 - u2) / (u2 - u1)) - std::log(target);
    };
    double lo = 1.0, hi = 200.0;
    if (mismatch(lo) * mismatch(hi) > 0.0) {
        throw ConfigurationError("calibrate_thermal_model: no exponent in [1, 200] fits the anchors");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mismatch(lo) * mismatch(mid) <= 0.0) hi = mid; else lo = mid;
    }
    ThermalModel model;
    model.conductance_exponent = 0.5 * (lo + hi);
    const double n = model.conductance_exponent;
    model.conductance_coefficient = (p2 - p1) / (std::pow(t2, n) - std::pow(t1, n));
    model.parasitic_load =
        model.conductance_coefficient * (std::pow(t1, n) - std::pow(t_cryostat, n)) - p1;
    model.no_film_temperature = no_film_temperature;
    if (model.parasitic_load < 0.0) {
        throw ConfigurationError("calibrate_thermal_model: anchors imply a negative parasitic load");
    }
    return model;
}

ThermalModel calibrate_conductance(ThermalModel model, double t_cryostat, ThermalAnchor anchor) {
    const double n = model.conductance_exponent;
    const double span = std::pow(anchor.t_mode, n) - std::pow(t_cryostat, n);
    if (!(span > 0.0)) {
        throw ConfigurationError("calibrate_conductance: anchor temperature must exceed cryostat temperature");
    }
    model.conductance_coefficient = (anchor.p_abs + model.parasitic_load) / span;
    return model;
}

double mode_temperature(double t_cryostat, double p_abs, const ThermalModel& model,
                        const FilmState& film) {
    if (!(t_cryostat > 0.0)) throw DomainError("mode_temperature: cryostat temperature must be > 0 K");
    if (!(p_abs >= 0.0)) throw DomainError("mode_temperature: absorbed power must be >= 0 W");
    validate(model);
    if (film.boiled_off) return model.no_film_temperature;
    const double heat = p_abs + model.parasitic_load;
    if (heat == 0.0) return t_cryostat;
    const double n = model.conductance_exponent;
    // T_c (1 + h / (a T_c^n))^(1/n), kept accurate when the heat is small against a T_c^n
    const double rel = heat / (model.conductance_coefficient * std::pow(t_cryostat, n));
    return t_cryostat * std::exp(std::log1p(rel) / n);
}

double critical_power(const HeliumProperties& props) {
    return props.effective_latent_heat() * max_film_mass_flow(props);
}

FilmState update_film_state(const FilmState& state, double t_mode, double p_abs,
                            const HeliumProperties& props) {
    if (state.boiled_off) return FilmState{false, true};
    const bool can_form = t_mode < props.t_film_transition;
    if ((state.present || can_form) && p_abs > critical_power(props)) return FilmState{false, true};
    return FilmState{can_form, false};
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (n < 1) throw ArgumentError("grid needs at least one point");
    if (!(lo > 0.0 && hi > 0.0)) throw ArgumentError("log grid bounds must be > 0");
    std::vector<double> g(static_cast<std::size_t>(n));
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
    if (n < 1) throw ArgumentError("grid needs at least one point");
    std::vector<double> g(static_cast<std::size_t>(n));
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    g.front() = lo;
    g.back() = hi;
    return g;
}

ExperimentResult power_sweep(double p_min, double p_max, int n_points, double t_cryostat,
                             const ThermalModel& model, const HeliumProperties& props,
                             double absorbed_fraction) {
    if (!(p_min >= 0.0 && p_min < p_max)) throw ArgumentError("power_sweep: need 0 <= p_min < p_max");
    if (n_points < 2) throw ArgumentError("power_sweep: need at least 2 points");
    if (!(absorbed_fraction >= 0.0 && absorbed_fraction <= 1.0)) {
        throw ArgumentError("power_sweep: absorbed_fraction must lie in [0, 1]");
    }
    const auto grid = p_min > 0.0 ? log_grid(p_min, p_max, n_points)
                                  : linear_grid(p_min, p_max, n_points);

    ExperimentResult result;
    auto& inj = result.add_column("power_injected", "W");
    auto& abs = result.add_column("power_absorbed", "W");
    auto& temp = result.add_column("t_mode", "K");
    auto& present = result.add_column("film_present", "1");
    auto& boiled = result.add_column("boiled_off", "1");

    FilmState film;
    for (double p : grid) {
        const double pa = absorbed_fraction * p;
        double t = mode_temperature(t_cryostat, pa, model, film);
        film = update_film_state(film, t, pa, props);
        if (film.boiled_off) t = model.no_film_temperature;
        inj.values.push_back(p);
        abs.values.push_back(pa);
        temp.values.push_back(t);
        present.values.push_back(film.present ? 1.0 : 0.0);
        boiled.values.push_back(film.boiled_off ? 1.0 : 0.0);
    }
    result.set_meta("t_cryostat_K", t_cryostat);
    result.set_meta("critical_power_W", critical_power(props));
    return result;
}

}  // namespace sfforce
