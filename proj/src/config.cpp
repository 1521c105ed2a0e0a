#include "sfforce/config.hpp"

#include "sfforce/result.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>

namespace sfforce {

namespace {

enum class Kind { Real, Integer, RealList, Text, Seed };

struct Key {
    std::string name;
    Kind kind;
    std::function<void(ExperimentConfig&, const std::vector<double>&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <typename Access>
Key real_key(std::string name, Access access) {
    return {std::move(name), Kind::Real,
            [access](ExperimentConfig& c, const std::vector<double>& v, const std::string&) {
                access(c.params) = v.front();
            },
            [access](const ExperimentConfig& c) {
                return format_double(access(c.params));
            }};
}

template <typename Access>
Key int_key(std::string name, Access access) {
    return {std::move(name), Kind::Integer,
            [access](ExperimentConfig& c, const std::vector<double>& v, const std::string&) {
                access(c.params) = static_cast<int>(v.front());
            },
            [access](const ExperimentConfig& c) {
                return std::to_string(access(c.params));
            }};
}

#define SF_REAL(key, member) real_key(key, [](auto& p) -> auto& { return p.member; })
#define SF_INT(key, member) int_key(key, [](auto& p) -> auto& { return p.member; })

const std::vector<Key>& key_table() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k{
            {"experiment", Kind::Text,
             [](ExperimentConfig& c, const std::vector<double>&, const std::string& s) { c.experiment = s; },
             [](const ExperimentConfig& c) { return c.experiment; }},
            {"output_dir", Kind::Text,
             [](ExperimentConfig& c, const std::vector<double>&, const std::string& s) { c.output_dir = s; },
             [](const ExperimentConfig& c) { return c.output_dir; }},
            {"seed", Kind::Seed,
             [](ExperimentConfig& c, const std::vector<double>&, const std::string& s) {
                 c.seed = std::stoull(s);
             },
             [](const ExperimentConfig& c) { return std::to_string(c.seed); }},

            SF_REAL("materials.m_he", helium.m_he),
            SF_REAL("materials.latent_heat", helium.latent_heat),
            SF_REAL("materials.mu_vdw", helium.mu_vdw),
            SF_REAL("materials.v_landau", helium.v_landau),
            SF_REAL("materials.t_film_transition", helium.t_film_transition),
            SF_REAL("materials.film_thickness", helium.film_thickness),
            SF_REAL("materials.flow_width", helium.flow_width),
            SF_REAL("materials.density", helium.density),

            SF_REAL("cavity.wavelength", cavity.wavelength),
            SF_REAL("cavity.linewidth_kappa", cavity.linewidth_kappa),
            SF_REAL("cavity.finesse", cavity.finesse),
            SF_REAL("cavity.absorbed_fraction", cavity.absorbed_fraction),

            SF_REAL("mode.omega_m", mode.omega_m),
            SF_REAL("mode.gamma_m", mode.gamma_m),
            SF_REAL("mode.mass_eff", mode.mass_eff),
            SF_REAL("mode.g0", mode.g0),
            SF_REAL("mode.overlap_eta", mode.overlap_eta),

            SF_REAL("thermal.conductance_coefficient", thermal.conductance_coefficient),
            SF_REAL("thermal.conductance_exponent", thermal.conductance_exponent),
            SF_REAL("thermal.parasitic_load", thermal.parasitic_load),
            SF_REAL("thermal.no_film_temperature", thermal.no_film_temperature),

            SF_REAL("forcing.superfluid_cutoff", forcing.superfluid_cutoff),
            SF_INT("forcing.filter_order", forcing.filter_order),
            SF_REAL("forcing.evap_offset", forcing.evap_offset),
            SF_REAL("forcing.band_delta", forcing.band_delta),

            SF_INT("sim.steps_per_period", sim.steps_per_period),
            SF_INT("sim.output_stride", sim.output_stride),
            SF_REAL("sim.relaxation_times", sim.relaxation_times),
            SF_INT("sim.runs_per_point", sim.runs_per_point),
            SF_INT("sim.segment_length", sim.segment_length),
            SF_REAL("sim.overlap", sim.overlap),
            SF_INT("sim.workers", sim.workers),

            SF_REAL("fig2a.t_max", fig2a.t_max),
            SF_REAL("fig2a.t_min", fig2a.t_min),
            SF_INT("fig2a.n_points", fig2a.n_points),
            SF_REAL("fig2a.power", fig2a.power),

            SF_REAL("fig2b.p_min", fig2b.p_min),
            SF_REAL("fig2b.p_max", fig2b.p_max),
            SF_INT("fig2b.n_points", fig2b.n_points),
            SF_REAL("fig2b.t_cryostat", fig2b.t_cryostat),

            SF_REAL("fig3.t_max", fig3.t_max),
            SF_REAL("fig3.t_min", fig3.t_min),
            SF_INT("fig3.n_points", fig3.n_points),
            SF_REAL("fig3.carrier_power", fig3.carrier_power),
            SF_REAL("fig3.modulation_depth", fig3.modulation_depth),

            SF_REAL("fig4.gain_min", fig4.gain_min),
            SF_REAL("fig4.gain_max", fig4.gain_max),
            SF_INT("fig4.n_points", fig4.n_points),
            SF_REAL("fig4.t_bath", fig4.t_bath),
            SF_REAL("fig4.measurement_noise_psd", fig4.measurement_noise_psd),
            SF_REAL("fig4.bandpass_linewidths", fig4.bandpass_linewidths),
            SF_REAL("fig4.loop_delay", fig4.loop_delay),

            {"force_table.powers", Kind::RealList,
             [](ExperimentConfig& c, const std::vector<double>& v, const std::string&) {
                 c.params.force_table.powers = v;
             },
             [](const ExperimentConfig& c) {
                 std::string s;
                 for (double p : c.params.force_table.powers) {
                     if (!s.empty()) s += ", ";
                     s += format_double(p);
                 }
                 return s;
             }},
            SF_REAL("force_table.t_evap", force_table.t_evap),
        };
        return k;
    }();
    return keys;
}

#undef SF_REAL
#undef SF_INT

const Key* find_key(std::string_view name) {
    for (const auto& k : key_table()) {
        if (k.name == name) return &k;
    }
    return nullptr;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

// Parses and applies one assignment; returns an error message or empty.
std::string assign(ExperimentConfig& config, const Key& key, std::string_view raw) {
    const std::string value(trim(raw));
    std::vector<double> numbers;
    switch (key.kind) {
        case Kind::Text:
            if (value.empty()) return "expected a non-empty value";
            break;
        case Kind::Seed: {
            if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
                return "expected a non-negative integer, got '" + value + "'";
            }
            break;
        }
        case Kind::Real: {
            const auto v = parse_real(value);
            if (!v) return "expected a number, got '" + value + "'";
            numbers.push_back(*v);
            break;
        }
        case Kind::Integer: {
            const auto v = parse_real(value);
            if (!v || *v != std::floor(*v) || std::abs(*v) > 2e9) {
                return "expected an integer, got '" + value + "'";
            }
            numbers.push_back(*v);
            break;
        }
        case Kind::RealList: {
            std::string_view rest = value;
            while (true) {
                const auto comma = rest.find(',');
                const auto v = parse_real(rest.substr(0, comma));
                if (!v) return "expected a comma-separated list of numbers, got '" + value + "'";
                numbers.push_back(*v);
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
            break;
        }
    }
    key.set(config, numbers, value);
    config.overrides.emplace_back(key.name, value);
    return {};
}

void add_all(std::vector<ConfigIssue>& out, const std::string& ns, const std::vector<std::string>& msgs) {
    for (const auto& m : msgs) {
        // Messages start with the field name.
        const auto field = m.substr(0, m.find(' '));
        out.push_back({0, ns + "." + field, m});
    }
}

}  // namespace

std::string ConfigIssue::to_string() const {
    std::string s;
    if (line > 0) s += "line " + std::to_string(line) + ": ";
    if (!key.empty()) s += key + ": ";
    return s + message;
}

std::vector<ConfigIssue> check_invariants(const Parameters& p) {
    std::vector<ConfigIssue> out;
    add_all(out, "materials", p.helium.violations());
    add_all(out, "cavity", p.cavity.violations());
    add_all(out, "mode", p.mode.violations());
    add_all(out, "thermal", p.thermal.violations());

    auto require = [&](bool ok, const std::string& key, const std::string& msg) {
        if (!ok) out.push_back({0, key, msg});
    };
    require(p.forcing.superfluid_cutoff > 0.0, "forcing.superfluid_cutoff", "superfluid_cutoff must be > 0");
    require(p.forcing.filter_order >= 1, "forcing.filter_order", "filter_order must be >= 1");
    require(p.forcing.evap_offset >= 0.0, "forcing.evap_offset", "evap_offset must be >= 0");
    require(p.forcing.band_delta >= 0.0, "forcing.band_delta", "band_delta must be >= 0");

    require(p.sim.steps_per_period > 2.0 * kPi / 0.1, "sim.steps_per_period",
            "steps_per_period must exceed 2 pi / 0.1 (dt * omega_m < 0.1)");
    require(p.sim.output_stride >= 1, "sim.output_stride", "output_stride must be >= 1");
    require(p.sim.output_stride >= 1 && p.sim.steps_per_period / p.sim.output_stride >= 16,
            "sim.output_stride", "stored traces need >= 16 samples per period");
    require(p.sim.relaxation_times >= 100.0, "sim.relaxation_times",
            "relaxation_times must be >= 100 for thermometry");
    require(p.sim.runs_per_point >= 1, "sim.runs_per_point", "runs_per_point must be >= 1");
    require(p.sim.segment_length >= 0, "sim.segment_length", "segment_length must be >= 0");
    require(p.sim.overlap >= 0.0 && p.sim.overlap < 1.0, "sim.overlap", "overlap must lie in [0, 1)");
    require(p.sim.workers >= 0, "sim.workers", "workers must be >= 0");

    require(p.fig2a.t_min > 0.0 && p.fig2a.t_min < p.fig2a.t_max, "fig2a.t_min", "need 0 < t_min < t_max");
    require(p.fig2a.n_points >= 2, "fig2a.n_points", "n_points must be >= 2");
    require(p.fig2a.power >= 0.0, "fig2a.power", "power must be >= 0");
    require(p.fig2b.p_min >= 0.0 && p.fig2b.p_min < p.fig2b.p_max, "fig2b.p_min", "need 0 <= p_min < p_max");
    require(p.fig2b.n_points >= 2, "fig2b.n_points", "n_points must be >= 2");
    require(p.fig2b.t_cryostat > 0.0, "fig2b.t_cryostat", "t_cryostat must be > 0");
    require(p.fig3.t_min > 0.0 && p.fig3.t_min < p.fig3.t_max, "fig3.t_min", "need 0 < t_min < t_max");
    require(p.fig3.n_points >= 2, "fig3.n_points", "n_points must be >= 2");
    require(p.fig3.carrier_power >= 0.0, "fig3.carrier_power", "carrier_power must be >= 0");
    require(p.fig3.modulation_depth > 0.0, "fig3.modulation_depth", "modulation_depth must be > 0");
    require(p.fig4.gain_min > 0.0 && p.fig4.gain_min <= p.fig4.gain_max, "fig4.gain_min",
            "need 0 < gain_min <= gain_max");
    require(p.fig4.n_points >= 1, "fig4.n_points", "n_points must be >= 1");
    require(p.fig4.t_bath >= 0.0, "fig4.t_bath", "t_bath must be >= 0");
    require(p.fig4.measurement_noise_psd >= 0.0, "fig4.measurement_noise_psd",
            "measurement_noise_psd must be >= 0");
    require(p.fig4.bandpass_linewidths > 0.0, "fig4.bandpass_linewidths", "bandpass_linewidths must be > 0");
    require(p.fig4.loop_delay >= 0.0, "fig4.loop_delay", "loop_delay must be >= 0");
    bool powers_ok = !p.force_table.powers.empty();
    for (double v : p.force_table.powers) powers_ok = powers_ok && v >= 0.0;
    require(powers_ok, "force_table.powers", "powers must be a non-empty list of values >= 0");
    require(p.force_table.t_evap > 0.0, "force_table.t_evap", "t_evap must be > 0");
    return out;
}

ConfigValidation validate_config(std::string_view text) {
    ConfigValidation result;
    std::map<std::string, int> seen; // key -> line that set it
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            result.errors.push_back({line_no, "", "expected 'key = value', got '" + std::string(line) + "'"});
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto value = line.substr(eq + 1);
        const Key* k = find_key(key);
        if (!k) {
            result.errors.push_back({line_no, key, "unknown key"});
            continue;
        }
        if (!seen.emplace(key, line_no).second) {
            result.errors.push_back({line_no, key, "duplicate key"});
            continue;
        }
        if (auto err = assign(result.config, *k, value); !err.empty()) {
            result.errors.push_back({line_no, key, err});
        }
    }
    for (auto& issue : check_invariants(result.config.params)) {
        if (const auto it = seen.find(issue.key); it != seen.end()) issue.line = it->second;
        result.errors.push_back(std::move(issue));
    }
    std::stable_sort(result.errors.begin(), result.errors.end(),
                     [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
    return result;
}

std::vector<ConfigIssue> apply_override(ExperimentConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        return {{0, "", "expected key=value, got '" + std::string(assignment) + "'"}};
    }
    const std::string key(trim(assignment.substr(0, eq)));
    const Key* k = find_key(key);
    if (!k) return {{0, key, "unknown key"}};
    if (auto err = assign(config, *k, assignment.substr(eq + 1)); !err.empty()) return {{0, key, err}};
    return check_invariants(config.params);
}

std::vector<std::pair<std::string, std::string>> snapshot(const ExperimentConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : key_table()) out.emplace_back(k.name, k.get(config));
    return out;
}

std::vector<std::string> known_keys() {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.push_back(k.name);
    return out;
}

}  // namespace sfforce
