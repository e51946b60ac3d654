#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gsm/harness.hpp"
#include "gsm/observations.hpp"
#include "gsm/sampler.hpp"

namespace gsm::cli {

inline constexpr const char* TOOL_VERSION = "0.1.0";

//! Process exit codes; stable for scripting.
enum ExitCode : int {
    EXIT_OK = 0,
    EXIT_RUNTIME = 1,
    EXIT_DATA = 2,
    EXIT_CONFIG = 3,
};

//==========================================================================
// Configuration documents
//==========================================================================

//! fit config: {"J", "alpha"+"beta" | "omega", "iterations", "burn_in", "thin", "variant", "seed", "transform"}.
struct FitConfig {
    std::size_t n_components = 50;
    //! Explicit (alpha, beta), or calibration weight omega.
    std::variant<Hyperparams, double> hyper_source = DEFAULT_PRIOR_WEIGHT;
    ChainConfig chain{5000, 1000, Variant::collapsed, 1, 1};
    Transform transform = Transform::identity;
};

//! Throws ConfigError on unknown keys, wrong types or invalid values.
FitConfig parse_fit_config(const nlohmann::json& j);

//! Experiment config. Thresholds are given either explicitly ("thresholds", data units)
//! or as type-7 quantiles of the population ("threshold_quantiles").
struct SimulateConfig {
    ExperimentConfig experiment;
    std::vector<double> threshold_quantiles;
};

SimulateConfig parse_simulate_config(const nlohmann::json& j);
//! Fills experiment.thresholds from the quantiles when they were given that way.
void resolve_thresholds(SimulateConfig& config, const Observations& population);
nlohmann::json to_json(const ExperimentConfig& config);

//! Synthetic population from {"n": N, "gsm": {...}} | {"n": N, "lognormal": {"mu", "sigma"}} |
//! {"n": N, "pareto_mix": {"weights", "scales", "shapes"}}. With "on_scale": "cube_root" the gsm
//! draws are taken as cube roots and cubed, giving a heavy-tailed population. Draws come from
//! RngStream(seed, GENERATOR_STREAM) so they never overlap replicate streams.
Observations generate_population(const nlohmann::json& spec, std::uint64_t seed);
inline constexpr std::uint64_t GENERATOR_STREAM = ~std::uint64_t{0};

//==========================================================================
// Commands
//==========================================================================

struct FitArgs {
    std::filesystem::path data;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
};

struct TailArgs {
    std::filesystem::path draws;
    std::vector<double> k;
    std::optional<std::filesystem::path> k_file;
    std::filesystem::path out;
    double level = 0.95;
};

struct CalibrateArgs {
    std::filesystem::path data;
    std::size_t n_components = 50;
    double omega = DEFAULT_PRIOR_WEIGHT;
    Transform transform = Transform::identity;
    std::optional<std::filesystem::path> out;
};

struct SimulateArgs {
    std::optional<std::filesystem::path> population;
    //! Path to a generator JSON file, or the JSON text itself.
    std::optional<std::string> generator;
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
};

struct DiagnoseArgs {
    std::filesystem::path draws;
    std::filesystem::path data;
    std::filesystem::path out;
};

//! Each command writes its outputs plus manifest.json into the output directory,
//! prints human-readable messages to \p err and returns an ExitCode.
int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);
int cmd_tail(const TailArgs& args, std::ostream& out, std::ostream& err);
int cmd_calibrate(const CalibrateArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_diagnose(const DiagnoseArgs& args, std::ostream& out, std::ostream& err);

//! Parses the command line (gsm-tail <command> ...) and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

//! Sets the log level from GSM_TAIL_LOG (trace, debug, info, warn, error, off). Default warn.
void init_logging();

}  // namespace gsm::cli
