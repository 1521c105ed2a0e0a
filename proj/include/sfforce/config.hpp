#pragma once

#include "sfforce/controller.hpp"
#include "sfforce/forcing.hpp"
#include "sfforce/materials.hpp"
#include "sfforce/mode.hpp"
#include "sfforce/thermal.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sfforce {

struct ForcingSettings {
    double superfluid_cutoff = kTwoPi * 2.0e6; // rad/s
    int filter_order = 1;
    double evap_offset = 0.8;  // K, T_evap - T_mode used for the simulated film
    double band_delta = 1.0;   // K, upper edge of the theory band above T_mode
};

struct SimulationSettings {
    int steps_per_period = 64;
    int output_stride = 4;
    double relaxation_times = 1000.0; // run length in units of 1 / gamma_m
    int runs_per_point = 1;
    int segment_length = 0;           // 0 = automatic
    double overlap = 0.5;
    int workers = 0;                  // 0 = hardware concurrency
};

struct Fig2aSettings {
    double t_max = 10.0;
    double t_min = 0.32;
    int n_points = 40;
    double power = 100e-9; // W injected
};

struct Fig2bSettings {
    double p_min = 10e-9;
    double p_max = 3.3e-6;
    int n_points = 400;
    double t_cryostat = 0.32;
};

struct Fig3Settings {
    double t_max = 2.0;
    double t_min = 0.32;
    int n_points = 12;
    double carrier_power = 2.1e-6; // W injected
    double modulation_depth = 0.5;
};

struct Fig4Settings {
    double gain_min = 0.01;
    double gain_max = 10.0;
    int n_points = 13;
    double t_bath = 0.715;
    double measurement_noise_psd = 7.7e-32; // m^2/Hz
    double bandpass_linewidths = 50.0;
    double loop_delay = 0.0;
};

struct ForceTableSettings {
    std::vector<double> powers{0.0, 1e-7, 1e-6, 2.1e-6}; // W absorbed
    double t_evap = 1.0;
};

/// Every tunable value, defaulted to the calibrated reference set.
struct Parameters {
    HeliumProperties helium;
    OpticalCavity cavity;
    MechanicalMode mode;
    ThermalModel thermal;
    ForcingSettings forcing;
    SimulationSettings sim;
    Fig2aSettings fig2a;
    Fig2bSettings fig2b;
    Fig3Settings fig3;
    Fig4Settings fig4;
    ForceTableSettings force_table;
};

struct ExperimentConfig {
    std::string experiment;       // optional default experiment name
    std::string output_dir = "."; // where run_experiment results are written
    std::uint64_t seed = 1;
    Parameters params;
    // Keys set explicitly, in the order they were applied.
    std::vector<std::pair<std::string, std::string>> overrides;
};

struct ConfigIssue {
    int line = 0; // 1-based; 0 when not tied to a line
    std::string key;
    std::string message;

    std::string to_string() const;
};

struct ConfigValidation {
    ExperimentConfig config;
    std::vector<ConfigIssue> errors;

    bool ok() const { return errors.empty(); }
};

/// Parses flat `namespace.key = value` text. '#' starts a comment, values
/// are SI floats (comma-separated for list keys) with units fixed by the
/// key. Unknown keys, syntax errors and every physical-invariant violation
/// are collected rather than stopping at the first.
ConfigValidation validate_config(std::string_view text);

/// Applies `key=value` on top of an existing config. Returns the issues
/// found (empty on success); invariants are re-checked.
std::vector<ConfigIssue> apply_override(ExperimentConfig& config, std::string_view assignment);

/// Invariant violations of the assembled parameter set, keyed by namespace.
std::vector<ConfigIssue> check_invariants(const Parameters& params);

/// All keys in `key = value` form with current values.
std::vector<std::pair<std::string, std::string>> snapshot(const ExperimentConfig& config);

std::vector<std::string> known_keys();

}  // namespace sfforce
