#include "sfforce/experiments.hpp"

#include "sfforce/dynamics.hpp"
#include "sfforce/feedback.hpp"
#include "sfforce/forcing.hpp"
#include "sfforce/parallel.hpp"
#include "sfforce/spectral.hpp"
#include "sfforce/thermal.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#ifndef SFFORCE_VERSION
#define SFFORCE_VERSION "unknown"
#endif

namespace sfforce {

namespace {

using Runner = std::function<ExperimentResult(const ExperimentConfig&)>;

void stamp(ExperimentResult& r, const std::string& name, const ExperimentConfig& c) {
    r.set_meta("experiment", name);
    r.set_meta("code_version", code_version());
    r.set_meta("seed", std::to_string(c.seed));
    for (const auto& [k, v] : snapshot(c)) {
        if (k == "seed" || k == "output_dir" || k == "experiment") continue;
        r.set_meta("config." + k, v);
    }
}

SimulationConfig base_sim(const Parameters& p, std::uint64_t seed) {
    auto cfg = SimulationConfig::for_mode(p.mode, p.sim.relaxation_times, p.sim.steps_per_period,
                                          p.sim.output_stride);
    cfg.seed = seed;
    cfg.superfluid_cutoff = p.forcing.superfluid_cutoff;
    cfg.superfluid_filter_order = p.forcing.filter_order;
    return cfg;
}

ExperimentResult run_fig2a(const ExperimentConfig& c) {
    const auto& p = c.params;
    auto grid = log_grid(p.fig2a.t_min, p.fig2a.t_max, p.fig2a.n_points);
    std::reverse(grid.begin(), grid.end());
    const double p_abs = p.cavity.absorbed_power(p.fig2a.power);

    ExperimentResult r;
    auto& tc = r.add_column("t_cryostat", "K");
    auto& tm = r.add_column("t_mode", "K");
    auto& dev = r.add_column("relative_excess", "1");
    auto& film_col = r.add_column("film_present", "1");
    FilmState film;
    for (double t : grid) {
        double t_mode = mode_temperature(t, p_abs, p.thermal, film);
        film = update_film_state(film, t_mode, p_abs, p.helium);
        if (film.boiled_off) t_mode = p.thermal.no_film_temperature;
        tc.values.push_back(t);
        tm.values.push_back(t_mode);
        dev.values.push_back((t_mode - t) / t);
        film_col.values.push_back(film.present ? 1.0 : 0.0);
    }
    r.set_meta("base_temperature_K", tm.values.back());
    return r;
}

ExperimentResult run_fig2b(const ExperimentConfig& c) {
    const auto& p = c.params;
    auto r = power_sweep(p.fig2b.p_min, p.fig2b.p_max, p.fig2b.n_points, p.fig2b.t_cryostat,
                         p.thermal, p.helium, p.cavity.absorbed_fraction);
    const auto& power = r.column("power_injected").values;
    const auto& boiled = r.column("boiled_off").values;
    const auto& temp = r.column("t_mode").values;
    const auto first = std::find(boiled.begin(), boiled.end(), 1.0);
    if (first != boiled.end() && first != boiled.begin()) {
        const auto i = static_cast<std::size_t>(first - boiled.begin());
        r.set_meta("threshold_lower_W", power[i - 1]);
        r.set_meta("threshold_upper_W", power[i]);
        r.set_meta("threshold_W", 0.5 * (power[i - 1] + power[i]));
        r.set_meta("t_mode_below_threshold_K", temp[i - 1]);
    }
    r.set_meta("t_mode_first_K", temp.front());
    r.set_meta("t_mode_last_K", temp.back());
    return r;
}

ExperimentResult run_fig3(const ExperimentConfig& c) {
    const auto& p = c.params;
    auto grid = log_grid(p.fig3.t_min, p.fig3.t_max, p.fig3.n_points);
    std::reverse(grid.begin(), grid.end());
    const double p_abs = p.cavity.absorbed_power(p.fig3.carrier_power);
    const double omega = p.mode.omega_m;

    struct Point {
        double t_cryostat;
        double t_mode;
        FilmState film;
        ForceBreakdown forces;
    };
    std::vector<Point> points;
    FilmState film;
    for (double t : grid) {
        double t_mode = mode_temperature(t, p_abs, p.thermal, film);
        film = update_film_state(film, t_mode, p_abs, p.helium);
        if (film.boiled_off) t_mode = p.thermal.no_film_temperature;
        const double t_evap = t_mode + p.forcing.evap_offset;
        points.push_back({t, t_mode, film,
                          compute_forces(p_abs, t_evap, film.present, p.cavity, p.helium, p.mode)});
    }

    const auto runs = static_cast<std::size_t>(p.sim.runs_per_point);
    auto task = [&](std::size_t k) {
        const auto& pt = points[k / runs];
        auto cfg = base_sim(p, c.seed + 1000003ULL * (k / runs) + 7919ULL * (k % runs));
        cfg.t_bath = pt.t_mode;
        cfg.drive = OpticalDrive{omega, p.fig3.modulation_depth, p_abs};
        const auto trace = simulate(p.mode, cfg, pt.forces, pt.film);
        return driven_response(trace, p.mode.frequency_hz(), p.mode, TraceChannel::Measured);
    };
    const auto responses = parallel_map<DrivenResponse>(
        points.size() * runs, std::function<DrivenResponse(std::size_t)>(task),
        static_cast<unsigned>(p.sim.workers));

    std::vector<std::complex<double>> force(points.size()), disp(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t r = 0; r < runs; ++r) {
            force[i] += responses[i * runs + r].force / static_cast<double>(runs);
            disp[i] += responses[i * runs + r].displacement / static_cast<double>(runs);
        }
    }

    // Radiation-pressure-only reference from the film-free points.
    std::complex<double> reference(0.0, 0.0);
    std::size_t n_ref = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].film.present) {
            reference += force[i];
            ++n_ref;
        }
    }
    if (n_ref) {
        reference /= static_cast<double>(n_ref);
    } else {
        auto cfg = base_sim(p, c.seed);
        cfg.drive = OpticalDrive{omega, p.fig3.modulation_depth, p_abs};
        reference = drive_force_phasor(p.mode, cfg, compute_forces(p_abs, 1.0, false, p.cavity, p.helium, p.mode), {});
    }

    const double gain = std::abs(superfluid_response_gain(omega, p.forcing.superfluid_cutoff,
                                                          p.forcing.filter_order));
    const double eta = p.mode.overlap_eta;
    const double depth = p.fig3.modulation_depth;

    ExperimentResult r;
    auto& c_tc = r.add_column("t_cryostat", "K");
    auto& c_tm = r.add_column("t_mode", "K");
    auto& c_film = r.add_column("film_present", "1");
    auto& c_tev = r.add_column("t_evap", "K");
    auto& c_amp = r.add_column("response_amplitude", "m");
    auto& c_force = r.add_column("force_modal", "N");
    auto& c_db = r.add_column("response_db", "dB");
    auto& c_sf = r.add_column("sf_force_modal_measured", "N");
    auto& c_sf_tot = r.add_column("sf_force_total_inferred", "N");
    auto& c_lo = r.add_column("theory_low_modal", "N");
    auto& c_hi = r.add_column("theory_high_modal", "N");

    double step_db = 0.0, step_t = 0.0, step_upper = 0.0, step_lower = 0.0;
    bool found = false;
    double peak_sf = 0.0;
    int outside = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        const double db = 20.0 * std::log10(std::abs(force[i]) / std::abs(reference));
        double sf = 0.0, lo = 0.0, hi = 0.0;
        if (pt.film.present) {
            sf = std::abs(force[i] - reference);
            const auto band = theory_band(p_abs, pt.t_mode, p.forcing.band_delta, p.helium);
            lo = depth * gain * eta * band.low;
            hi = depth * gain * eta * band.high;
            if (sf < lo || sf > hi) ++outside;
            peak_sf = std::max(peak_sf, sf);
        }
        c_tc.values.push_back(pt.t_cryostat);
        c_tm.values.push_back(pt.t_mode);
        c_film.values.push_back(pt.film.present ? 1.0 : 0.0);
        c_tev.values.push_back(pt.film.present ? pt.forces.t_evap_used : 0.0);
        c_amp.values.push_back(std::abs(disp[i]));
        c_force.values.push_back(std::abs(force[i]));
        c_db.values.push_back(db);
        c_sf.values.push_back(sf);
        c_sf_tot.values.push_back(eta != 0.0 ? sf / std::abs(eta) : 0.0);
        c_lo.values.push_back(lo);
        c_hi.values.push_back(hi);
        if (!found && i > 0 && pt.film.present && !points[i - 1].film.present) {
            found = true;
            step_db = db - c_db.values[i - 1];
            step_upper = points[i - 1].t_mode;
            step_lower = pt.t_mode;
            step_t = 0.5 * (step_upper + step_lower);
        }
    }
    r.set_meta("rp_reference_force_N", std::abs(reference));
    r.set_meta("superfluid_gain_magnitude", gain);
    if (found) {
        r.set_meta("step_db", step_db);
        r.set_meta("step_temperature_K", step_t);
        r.set_meta("step_upper_K", step_upper);
        r.set_meta("step_lower_K", step_lower);
    }
    r.set_meta("peak_sf_force_modal_N", peak_sf);
    r.set_meta("peak_sf_force_total_N", eta != 0.0 ? peak_sf / std::abs(eta) : 0.0);
    r.set_meta("points_outside_band", std::to_string(outside));
    return r;
}

ExperimentResult run_fig4(const ExperimentConfig& c) {
    const auto& p = c.params;
    const auto gains = log_grid(p.fig4.gain_min, p.fig4.gain_max, p.fig4.n_points);
    auto cfg = base_sim(p, c.seed);
    cfg.t_bath = p.fig4.t_bath;
    cfg.measurement_noise_psd = p.fig4.measurement_noise_psd;
    auto controller = FeedbackController::for_mode(p.mode, 0.0, p.fig4.bandpass_linewidths);
    controller.loop_delay = p.fig4.loop_delay;
    CoolingCurveOptions opt;
    opt.runs_per_point = p.sim.runs_per_point;
    opt.segment_length = static_cast<std::size_t>(p.sim.segment_length);
    opt.overlap_fraction = p.sim.overlap;
    opt.workers = static_cast<unsigned>(p.sim.workers);
    const auto curve = cooling_curve(gains, p.mode, controller, cfg, opt);

    ExperimentResult r;
    auto& g = r.add_column("gain", "1");
    auto& tin = r.add_column("t_inloop", "K");
    auto& tout = r.add_column("t_outofloop", "K");
    auto& sin = r.add_column("t_inloop_sigma", "K");
    auto& sout = r.add_column("t_outofloop_sigma", "K");
    auto& occ = r.add_column("phonon_occupancy", "1");
    auto& pout = r.add_column("t_outofloop_predicted", "K");
    auto& pin = r.add_column("t_inloop_predicted", "K");
    auto& cout_ = r.add_column("t_outofloop_closed_loop", "K");
    auto& cin = r.add_column("t_inloop_closed_loop", "K");
    auto& st = r.add_column("stable", "1");

    double t_min = 0.0, g_min = 0.0, max_z = 0.0, max_z_ideal = 0.0;
    int unstable = 0;
    bool any = false;
    for (const auto& pt : curve) {
        g.values.push_back(pt.gain);
        tin.values.push_back(pt.t_inloop);
        tout.values.push_back(pt.t_outofloop);
        sin.values.push_back(pt.t_inloop_sigma);
        sout.values.push_back(pt.t_outofloop_sigma);
        occ.values.push_back(pt.phonon_occupancy);
        pout.values.push_back(pt.predicted.t_outofloop);
        pin.values.push_back(pt.predicted.t_inloop);
        cout_.values.push_back(pt.closed_loop.t_outofloop);
        cin.values.push_back(pt.closed_loop.t_inloop);
        st.values.push_back(pt.stable ? 1.0 : 0.0);
        if (!pt.stable) {
            ++unstable;
            continue;
        }
        if (!any || pt.t_outofloop < t_min) {
            t_min = pt.t_outofloop;
            g_min = pt.gain;
        }
        any = true;
        if (pt.t_outofloop_sigma > 0.0) {
            max_z = std::max(max_z, std::abs(pt.t_outofloop - pt.closed_loop.t_outofloop) / pt.t_outofloop_sigma);
            max_z_ideal =
                std::max(max_z_ideal, std::abs(pt.t_outofloop - pt.predicted.t_outofloop) / pt.t_outofloop_sigma);
        }
    }
    r.set_meta("t_bath_K", p.fig4.t_bath);
    r.set_meta("min_t_outofloop_K", t_min);
    r.set_meta("gain_at_min", g_min);
    r.set_meta("occupancy_at_min", phonon_occupancy(t_min, p.mode));
    r.set_meta("max_abs_z_outofloop", max_z);
    r.set_meta("max_abs_z_outofloop_ideal", max_z_ideal);
    r.set_meta("unstable_points", std::to_string(unstable));
    r.set_meta("optimal_gain_predicted", optimal_gain(p.fig4.t_bath, p.mode, p.fig4.measurement_noise_psd));
    return r;
}

ExperimentResult run_force_table(const ExperimentConfig& c) {
    const auto& p = c.params;
    const double ratio = force_ratio(p.force_table.t_evap, p.cavity, p.helium);
    ExperimentResult r;
    auto& pw = r.add_column("p_abs", "W");
    auto& te = r.add_column("t_evap", "K");
    auto& frp = r.add_column("f_radiation", "N");
    auto& fsf = r.add_column("f_superfluid_total", "N");
    auto& fmod = r.add_column("f_superfluid_modal", "N");
    auto& fr = r.add_column("force_ratio", "1");
    for (double power : p.force_table.powers) {
        const auto f = compute_forces(power, p.force_table.t_evap, true, p.cavity, p.helium, p.mode);
        pw.values.push_back(power);
        te.values.push_back(p.force_table.t_evap);
        frp.values.push_back(f.f_radiation);
        fsf.values.push_back(f.f_superfluid_total);
        fmod.values.push_back(f.f_superfluid_modal);
        fr.values.push_back(ratio);
    }
    r.set_meta("force_ratio", ratio);
    r.set_meta("force_ratio_times_finesse", ratio * p.cavity.finesse);
    return r;
}

struct Entry {
    ExperimentInfo info;
    Runner run;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries{
        {{"fig2a", "mode temperature while the cryostat cools from 10 K to 0.32 K at fixed probe power"}, run_fig2a},
        {{"fig2b", "mode temperature versus probe power at base temperature, with boil-off"}, run_fig2b},
        {{"fig3", "driven response versus cryostat temperature across the film transition"}, run_fig3},
        {{"fig4", "feedback cooling curve: in-loop and out-of-loop temperature versus gain"}, run_fig4},
        {{"force-table", "radiation pressure and photoconvective forces versus absorbed power"}, run_force_table},
    };
    return entries;
}

}  // namespace

std::string code_version() { return SFFORCE_VERSION; }

const std::vector<ExperimentInfo>& list_experiments() {
    static const std::vector<ExperimentInfo> infos = [] {
        std::vector<ExperimentInfo> out;
        for (const auto& e : registry()) out.push_back(e.info);
        return out;
    }();
    return infos;
}

bool has_experiment(const std::string& name) {
    return std::any_of(registry().begin(), registry().end(),
                       [&](const Entry& e) { return e.info.name == name; });
}

ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& config) {
    for (const auto& e : registry()) {
        if (e.info.name != name) continue;
        if (auto issues = check_invariants(config.params); !issues.empty()) {
            std::string msg = "invalid configuration:";
            for (const auto& i : issues) msg += "\n  " + i.to_string();
            throw ConfigurationError(msg);
        }
        auto result = e.run(config);
        stamp(result, name, config);
        return result;
    }
    throw UnknownExperiment("unknown experiment '" + name + "'");
}

std::filesystem::path write_result(const ExperimentResult& result, const std::filesystem::path& dir,
                                   const std::string& stem, double wall_time_s) {
    std::filesystem::create_directories(dir);
    const auto csv = dir / (stem + ".csv");
    {
        std::ofstream os(csv, std::ios::binary);
        if (!os) throw Error("cannot write " + csv.string());
        result.write_csv(os);
    }
    nlohmann::ordered_json meta;
    for (const auto& [k, v] : result.metadata()) meta["metadata"][k] = v;
    for (const auto& col : result.columns()) meta["columns"].push_back({{"name", col.name}, {"unit", col.unit}});
    meta["rows"] = result.rows();
    meta["wall_time_s"] = wall_time_s;
    std::ofstream js(dir / (stem + ".meta.json"));
    if (!js) throw Error("cannot write metadata for " + stem);
    js << meta.dump(2) << '\n';
    return csv;
}

}  // namespace sfforce
