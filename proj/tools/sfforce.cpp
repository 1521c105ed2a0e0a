#include "sfforce/experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kUsage = 2;
constexpr int kConfig = 3;
constexpr int kRuntime = 4;

struct ConfigFailure {
    std::vector<sfforce::ConfigIssue> issues;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigFailure{{{0, path, "cannot open config file"}}};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

sfforce::ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed,
                               const std::optional<std::string>& out) {
    auto parsed = sfforce::validate_config(path.empty() ? std::string{} : read_file(path));
    if (!parsed.ok()) throw ConfigFailure{parsed.errors};
    auto config = std::move(parsed.config);
    if (seed) config.seed = *seed;
    if (out) config.output_dir = *out;
    return config;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(item);
    return parts;
}

void run_one(const std::string& name, const sfforce::ExperimentConfig& config, const std::string& stem) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = sfforce::run_experiment(name, config);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto path = sfforce::write_result(result, config.output_dir, stem, wall);
    std::cout << path.string() << "  (" << result.rows() << " rows, " << wall << " s)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superfluid photoconvective forcing simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    app.add_option("--config", config_path, "config file (key = value)");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out, "output directory");

    std::string run_name;
    auto* run = app.add_subcommand("run", "run a registered experiment");
    run->add_option("experiment", run_name)->required();

    auto* list = app.add_subcommand("list", "list registered experiments");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config file and report every issue");
    validate->add_option("config", validate_path)->required();

    std::string sweep_name;
    std::string sweep_param;
    auto* sweep = app.add_subcommand("sweep", "run an experiment once per parameter value");
    sweep->add_option("experiment", sweep_name)->required();
    sweep->add_option("--param", sweep_param, "key=v1,v2,...")->required();

    // Flags are accepted both before and after the subcommand.
    for (auto* sub : {run, sweep}) {
        sub->add_option("--config", config_path);
        sub->add_option("--seed", seed);
        sub->add_option("--out", out);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*list) {
            for (const auto& e : sfforce::list_experiments()) std::cout << e.name << "\t" << e.description << "\n";
            return 0;
        }
        if (*validate) {
            auto parsed = sfforce::validate_config(read_file(validate_path));
            if (!parsed.ok()) throw ConfigFailure{parsed.errors};
            std::cout << validate_path << ": ok\n";
            return 0;
        }
        if (*run) {
            if (!sfforce::has_experiment(run_name)) throw sfforce::UnknownExperiment("unknown experiment '" + run_name + "'");
            run_one(run_name, load(config_path, seed, out), run_name);
            return 0;
        }
        if (*sweep) {
            if (!sfforce::has_experiment(sweep_name))
                throw sfforce::UnknownExperiment("unknown experiment '" + sweep_name + "'");
            const auto eq = sweep_param.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == sweep_param.size()) {
                std::cerr << "--param expects key=v1,v2,...\n";
                return kUsage;
            }
            const auto key = sweep_param.substr(0, eq);
            const auto base = load(config_path, seed, out);
            const auto values = split(sweep_param.substr(eq + 1), ',');
            std::vector<sfforce::ExperimentConfig> configs;
            for (const auto& v : values) {
                auto c = base;
                auto issues = sfforce::apply_override(c, key + "=" + v);
                if (!issues.empty()) throw ConfigFailure{issues};
                configs.push_back(std::move(c));
            }
            for (std::size_t i = 0; i < configs.size(); ++i)
                run_one(sweep_name, configs[i], sweep_name + "_" + std::to_string(i));
            return 0;
        }
    } catch (const ConfigFailure& f) {
        for (const auto& i : f.issues) std::cerr << "config error: " << i.to_string() << "\n";
        return kConfig;
    } catch (const sfforce::UnknownExperiment& e) {
        std::cerr << e.what() << " (see 'sfforce list')\n";
        return kUsage;
    } catch (const sfforce::ConfigurationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
