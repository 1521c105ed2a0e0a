#include "sfforce/errors.hpp"
#include "sfforce/thermal.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace sfforce;

namespace {

const FilmState kFilm{true, false};

}  // namespace

TEST_CASE("calibration anchors") {
    const ThermalModel model;
    CHECK(mode_temperature(0.32, 10e-9, model, kFilm) == doctest::Approx(0.51).epsilon(1e-9));
    CHECK(mode_temperature(0.32, 100e-9, model, kFilm) == doctest::Approx(0.56).epsilon(1e-9));
    CHECK(mode_temperature(0.32, 2.1e-6, model, kFilm) == doctest::Approx(0.73).epsilon(1e-9));
}

TEST_CASE("calibration round trip") {
    const std::array<ThermalAnchor, 3> anchors{{{10e-9, 0.51}, {100e-9, 0.56}, {2.1e-6, 0.73}}};
    const auto model = calibrate_thermal_model(0.32, anchors);
    const ThermalModel reference;
    CHECK(model.conductance_exponent == doctest::Approx(reference.conductance_exponent).epsilon(1e-8));
    CHECK(model.conductance_coefficient == doctest::Approx(reference.conductance_coefficient).epsilon(1e-7));
    CHECK(model.parasitic_load == doctest::Approx(reference.parasitic_load).epsilon(1e-7));
}

TEST_CASE("thermalized regime above 0.6 K") {
    const ThermalModel model;
    for (double t : {0.6, 0.8, 1.0, 2.0, 5.0}) {
        const double tm = mode_temperature(t, 100e-9, model, kFilm);
        CHECK(std::abs(tm - t) / t < 0.1);
    }
}

TEST_CASE("zero heat returns the cryostat temperature") {
    ThermalModel model;
    model.parasitic_load = 0.0;
    CHECK(mode_temperature(0.5, 0.0, model) == 0.5);
}

TEST_CASE("mode temperature is monotone in both arguments") {
    const ThermalModel model;
    double prev = 0.0;
    for (double p : log_grid(1e-9, 2e-6, 50)) {
        const double t = mode_temperature(0.32, p, model, kFilm);
        CHECK(t > prev);
        prev = t;
    }
    prev = 0.0;
    for (double tc : linear_grid(0.1, 3.0, 50)) {
        const double t = mode_temperature(tc, 100e-9, model, kFilm);
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("boiled-off film pins the mode at the no-film temperature") {
    const ThermalModel model;
    CHECK(mode_temperature(0.32, 3e-6, model, {false, true}) == 3.0);
}

TEST_CASE("critical power") {
    CHECK(critical_power({}) == doctest::Approx(2.2e-6).epsilon(1e-12));
}

TEST_CASE("film state latches on boil-off") {
    const HeliumProperties props;
    FilmState s;
    s = update_film_state(s, 0.7, 1e-6, props);
    CHECK(s.present);
    CHECK_FALSE(s.boiled_off);
    s = update_film_state(s, 0.7, 2.5e-6, props);
    CHECK(s.boiled_off);
    CHECK_FALSE(s.present);
    // Lowering the power does not bring the film back.
    s = update_film_state(s, 0.5, 1e-9, props);
    CHECK(s.boiled_off);
    CHECK_FALSE(s.present);
    s = reset_film();
    CHECK_FALSE(s.boiled_off);
}

TEST_CASE("film forms only below the transition") {
    const HeliumProperties props;
    CHECK_FALSE(update_film_state({}, 0.9, 1e-7, props).present);
    CHECK(update_film_state({}, 0.8, 1e-7, props).present);
}

TEST_CASE("power sweep endpoints and latched jump") {
    const auto r = power_sweep(10e-9, 3.3e-6, 400, 0.32, ThermalModel{}, HeliumProperties{});
    const auto& p = r.column("power_injected").values;
    const auto& t = r.column("t_mode").values;
    CHECK(t.front() == doctest::Approx(0.51).epsilon(1e-6));
    CHECK(t.back() == doctest::Approx(3.0));
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 2.2e-6) CHECK(t[i] < 0.74);
        if (p[i] > 2.2e-6) CHECK(t[i] == 3.0);
    }
}

TEST_CASE("grids") {
    const auto g = log_grid(0.01, 10.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g[0] == doctest::Approx(0.01));
    CHECK(g[1] == doctest::Approx(0.1));
    CHECK(g[3] == doctest::Approx(10.0));
    CHECK_THROWS_AS(log_grid(0.0, 1.0, 3), ArgumentError);
}

TEST_CASE("negative inputs are rejected") {
    CHECK_THROWS_AS(mode_temperature(-0.1, 1e-9, {}), DomainError);
    CHECK_THROWS_AS(mode_temperature(0.3, -1e-9, {}), DomainError);
}

TEST_CASE("monotone over a wide grid, including heat far below a T^n") {
    const ThermalModel model;
    const FilmState film{true, false};
    const auto powers = log_grid(1e-12, 2.1e-6, 80);
    const auto temps = log_grid(0.05, 20.0, 80);
    for (double tc : temps) {
        for (std::size_t i = 1; i < powers.size(); ++i) {
            REQUIRE(mode_temperature(tc, powers[i], model, film) >= mode_temperature(tc, powers[i - 1], model, film));
        }
    }
    for (double p : powers) {
        for (std::size_t i = 1; i < temps.size(); ++i) {
            REQUIRE(mode_temperature(temps[i], p, model, film) > mode_temperature(temps[i - 1], p, model, film));
        }
    }
}
