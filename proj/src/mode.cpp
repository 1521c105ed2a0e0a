#include "sfforce/mode.hpp"

#include "sfforce/errors.hpp"

#include <cmath>

namespace sfforce {

double MechanicalMode::x_zpf() const {
    return std::sqrt(kConstants.hbar / (2.0 * mass_eff * omega_m));
}

std::vector<std::string> MechanicalMode::violations() const {
    std::vector<std::string> out;
    if (!(omega_m > 0.0)) out.emplace_back("omega_m must be > 0");
    if (!(gamma_m > 0.0)) out.emplace_back("gamma_m must be > 0");
    if (!(gamma_m < omega_m)) out.emplace_back("gamma_m must be < omega_m (underdamped)");
    if (!(mass_eff > 0.0)) out.emplace_back("mass_eff must be > 0");
    if (!std::isfinite(overlap_eta)) out.emplace_back("overlap_eta must be finite");
    return out;
}

void validate(const MechanicalMode& mode) {
    const auto v = mode.violations();
    if (v.empty()) return;
    std::string msg = "invalid mechanical mode:";
    for (const auto& s : v) msg += " " + s + ";";
    throw ConfigurationError(msg);
}

}  // namespace sfforce
