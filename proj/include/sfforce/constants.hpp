#pragma once

namespace sfforce {

// CODATA 2018 exact / recommended values, SI units.
struct PhysicalConstants {
    double k_b = 1.380649e-23;     // J/K
    double c = 299792458.0;        // m/s
    double hbar = 1.054571817e-34; // J s
};

inline constexpr PhysicalConstants kConstants{};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace sfforce
