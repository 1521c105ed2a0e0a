#pragma once

#include "sfforce/config.hpp"
#include "sfforce/errors.hpp"
#include "sfforce/result.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sfforce {

struct ExperimentInfo {
    std::string name;
    std::string description;
};

/// Registered experiments: fig2a, fig2b, fig3, fig4, force-table.
const std::vector<ExperimentInfo>& list_experiments();

bool has_experiment(const std::string& name);

/// Thrown for an unknown experiment name.
class UnknownExperiment : public Error {
public:
    using Error::Error;
};

/// Runs a registered experiment in memory. Output is a pure function of the
/// config (including its seed); metadata carries the config snapshot.
ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& config);

/// Writes <dir>/<stem>.csv and the <dir>/<stem>.meta.json sidecar (which also
/// records wall time). Returns the CSV path.
std::filesystem::path write_result(const ExperimentResult& result, const std::filesystem::path& dir,
                                   const std::string& stem, double wall_time_s);

std::string code_version();

}  // namespace sfforce
