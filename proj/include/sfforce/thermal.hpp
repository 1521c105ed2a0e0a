#pragma once

#include "sfforce/materials.hpp"
#include "sfforce/result.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace sfforce {

/// Steady-state heat balance between the resonator and the cold plate:
///
///   p_abs + parasitic_load = a * (T_mode^n - T_cryostat^n)
///
/// The defaults come from calibrate_thermal_model() applied to the base
/// temperature anchors (0.32 K cold plate; 10 nW -> 0.51 K, 100 nW -> 0.56 K,
/// 2.1 uW -> 0.73 K).
struct ThermalModel {
    double conductance_coefficient = 5.1727177301115712e-05; // W/K^n
    double conductance_exponent = 10.110342927323442;
    double parasitic_load = 4.6654408698178355e-08;          // W
    double no_film_temperature = 3.0;                        // K

    std::vector<std::string> violations() const;
};

void validate(const ThermalModel& model);

/// (absorbed power, resulting mode temperature) at a fixed cryostat temperature.
struct ThermalAnchor {
    double p_abs = 0.0;
    double t_mode = 0.0;
};

/// Solves exponent, coefficient and parasitic load so that the three anchors
/// (taken at one cryostat temperature, ascending in power) are reproduced
/// exactly. Throws ConfigurationError if no exponent in [1, 200] fits.
ThermalModel calibrate_thermal_model(double t_cryostat, std::span<const ThermalAnchor, 3> anchors,
                                     double no_film_temperature = 3.0);

/// Solves only the conductance coefficient for one anchor, keeping exponent
/// and parasitic load from `model`.
ThermalModel calibrate_conductance(ThermalModel model, double t_cryostat, ThermalAnchor anchor);

struct FilmState {
    bool present = false;
    bool boiled_off = false; // latched; cleared only by reset_film()
};

inline FilmState reset_film() { return FilmState{}; }

/// Closed-form solution of the heat balance. Returns no_film_temperature
/// once the film has boiled off.
double mode_temperature(double t_cryostat, double p_abs, const ThermalModel& model,
                        const FilmState& film = {});

/// Absorbed power above which evaporation outruns the Landau-limited
/// resupply: (L - <mu_VDW>) * max_film_mass_flow.
double critical_power(const HeliumProperties& props);

/// Advances the film state machine. The film forms below the transition
/// temperature; exceeding critical_power while a film exists (or would form)
/// latches boiled_off.
FilmState update_film_state(const FilmState& state, double t_mode, double p_abs,
                            const HeliumProperties& props);

/// Injected-power sweep at a fixed cryostat temperature. Points are
/// processed in ascending power so the boil-off latch is applied in order.
/// The grid is logarithmic for p_min > 0, linear otherwise.
///
/// Columns: power_injected[W], power_absorbed[W], t_mode[K],
/// film_present[1], boiled_off[1].
ExperimentResult power_sweep(double p_min, double p_max, int n_points, double t_cryostat,
                             const ThermalModel& model, const HeliumProperties& props,
                             double absorbed_fraction = 1.0);

/// n points from lo to hi inclusive, endpoints exact.
std::vector<double> log_grid(double lo, double hi, int n);
std::vector<double> linear_grid(double lo, double hi, int n);

}  // namespace sfforce
