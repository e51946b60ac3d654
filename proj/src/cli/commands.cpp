#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "gsm/calibrate.hpp"
#include "gsm/cli.hpp"
#include "gsm/inference.hpp"
#include "gsm/io.hpp"

namespace gsm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t DENSITY_GRID_POINTS = 200;

std::shared_ptr<spdlog::logger> logger() {
    static const auto instance = [] {
        auto l = spdlog::stderr_logger_st("gsm-tail");
        l->set_pattern("[%l] %v");
        l->set_level(spdlog::level::warn);
        return l;
    }();
    return instance;
}

// Runs a command body and maps exceptions onto exit codes.
template <typename Body>
int guarded(const char* command, std::ostream& err, Body&& body) {
    try {
        body();
        return EXIT_OK;
    } catch (const ConfigError& e) {
        err << command << ": config error: " << e.what() << "\n";
        return EXIT_CONFIG;
    } catch (const DataError& e) {
        err << command << ": data error: " << e.what() << "\n";
        return EXIT_DATA;
    } catch (const std::exception& e) {
        err << command << ": " << e.what() << "\n";
        return EXIT_RUNTIME;
    }
}

struct Input {
    std::string role;
    fs::path path;
    std::string sha256;
};

class Manifest {
public:
    explicit Manifest(std::string command)
        : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

    std::string read_input(const std::string& role, const fs::path& path) {
        std::string bytes = read_file(path);
        inputs_.push_back({role, path, sha256_hex(bytes)});
        return bytes;
    }

    void write(const fs::path& dir, json config, std::uint64_t seed) const {
        json inputs = json::array();
        for (const auto& in : inputs_) {
            inputs.push_back({{"role", in.role}, {"path", in.path.generic_string()}, {"sha256", in.sha256}});
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
        const json manifest{{"command", command_},       {"config", std::move(config)},
                            {"seed", seed},              {"inputs", std::move(inputs)},
                            {"tool_version", TOOL_VERSION}, {"duration_seconds", elapsed.count()}};
        write_file(dir / "manifest.json", dump_json(manifest));
    }

private:
    std::string command_;
    std::chrono::steady_clock::time_point start_;
    std::vector<Input> inputs_;
};

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

Observations read_observations(Manifest& manifest, const std::string& role, const fs::path& path) {
    return Observations(parse_values_csv(manifest.read_input(role, path)));
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
}

template <typename Fill>
void write_csv(const fs::path& path, std::vector<std::string> header, Fill&& fill) {
    std::ostringstream buffer;
    CsvWriter csv(buffer, std::move(header));
    fill(csv);
    write_file(path, buffer.str());
}

// Draws were fitted on the transformed scale; report the transform recorded next to them.
Transform transform_of(const fs::path& draws_path) {
    const fs::path manifest_path = draws_path.parent_path() / "manifest.json";
    if (!fs::exists(manifest_path)) {
        logger()->warn("no manifest next to {}; assuming untransformed data", draws_path.string());
        return Transform::identity;
    }
    const json manifest = parse_json(read_file(manifest_path), manifest_path.string());
    try {
        return parse_transform(manifest.at("config").value("transform", std::string("identity")));
    } catch (const std::exception& e) {
        throw DataError(manifest_path.string() + ": unreadable transform (" + e.what() + ")");
    }
}

PosteriorDraws read_draws(Manifest& manifest, const fs::path& path) {
    const std::string text = manifest.read_input("draws", path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return posterior_draws_from_json(j);
}

// Posterior mean density in original units on an even grid over (0, 1.05 max(y)].
// For a cube-root fit, f_Y(y) = f_Z(y^{1/3}) y^{-2/3} / 3.
void write_density(const fs::path& path, const PosteriorDraws& draws, Transform transform, double y_max) {
    std::vector<double> grid(DENSITY_GRID_POINTS);
    std::vector<double> fitted_grid(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        grid[g] = 1.05 * y_max * static_cast<double>(g + 1) / static_cast<double>(grid.size());
        fitted_grid[g] = transform_value(grid[g], transform);
    }
    const std::vector<double> f = density_curve(draws, fitted_grid);
    write_csv(path, {"y", "density"}, [&](CsvWriter& csv) {
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double jacobian = transform == Transform::cube_root ? 1.0 / (3.0 * fitted_grid[g] * fitted_grid[g]) : 1.0;
            csv.field(grid[g]).field(f[g] * jacobian);
            csv.end_row();
        }
    });
}

json fit_config_json(const FitConfig& config, const Hyperparams& hyper) {
    json j{{"J", hyper.n_components},
           {"alpha", hyper.alpha},
           {"beta", hyper.beta},
           {"iterations", config.chain.iterations},
           {"burn_in", config.chain.burn_in},
           {"thin", config.chain.thin},
           {"variant", std::string(to_string(config.chain.variant))},
           {"seed", config.chain.seed},
           {"transform", std::string(to_string(config.transform))}};
    if (const double* omega = std::get_if<double>(&config.hyper_source)) {
        j["omega"] = *omega;
    }
    return j;
}

}  // namespace

void init_logging() {
    const char* env = std::getenv("GSM_TAIL_LOG");
    if (env == nullptr || *env == '\0') {
        return;
    }
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour it when asked for.
    if (level == spdlog::level::off && std::string(env) != "off") {
        logger()->warn("GSM_TAIL_LOG: unknown level '{}'", env);
        return;
    }
    logger()->set_level(level);
}

//==========================================================================
// fit
//==========================================================================

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
    return guarded("fit", err, [&] {
        Manifest manifest("fit");
        FitConfig config;
        if (args.config) {
            config = parse_fit_config(parse_json(manifest.read_input("config", *args.config), args.config->string()));
        }
        if (args.seed) {
            config.chain.seed = *args.seed;
        }
        const Observations raw = read_observations(manifest, "data", args.data);
        const Observations y = raw.transformed(config.transform);

        Hyperparams hyper;
        if (const auto* explicit_hyper = std::get_if<Hyperparams>(&config.hyper_source)) {
            hyper = *explicit_hyper;
        } else {
            const Calibration cal = calibrate(y, CalibrationInput{std::get<double>(config.hyper_source), config.n_components});
            for (const auto& w : cal.warnings) {
                err << "fit: warning: " << w << "\n";
            }
            hyper = cal.hyper;
        }
        logger()->info("fit: n={} J={} alpha={} beta={} iterations={} variant={}", y.size(), hyper.n_components,
                       hyper.alpha, hyper.beta, config.chain.iterations, to_string(config.chain.variant));

        const PosteriorDraws draws = run_chain(y, hyper, config.chain);
        ensure_dir(args.out);
        write_file(args.out / "draws.json", dump_json(to_json(draws)));
        write_file(args.out / "diagnostics.json", dump_json(to_json(diagnose_fit(draws, y))));
        write_density(args.out / "density.csv", draws, config.transform, raw.max());
        manifest.write(args.out, fit_config_json(config, hyper), config.chain.seed);
        out << "fit: " << draws.size() << " draws written to " << args.out.string() << "\n";
    });
}

//==========================================================================
// tail
//==========================================================================

int cmd_tail(const TailArgs& args, std::ostream& out, std::ostream& err) {
    return guarded("tail", err, [&] {
        Manifest manifest("tail");
        if (!(args.level > 0.0 && args.level < 1.0)) {
            throw ConfigError("--level must lie in (0, 1)");
        }
        std::vector<double> ks = args.k;
        if (args.k_file) {
            const auto more = read_thresholds_csv(*args.k_file);
            manifest.read_input("thresholds", *args.k_file);
            ks.insert(ks.end(), more.begin(), more.end());
        }
        if (ks.empty()) {
            throw ConfigError("no thresholds given (use --k or --k-file)");
        }
        for (double k : ks) {
            if (!(k >= 0.0) || !std::isfinite(k)) {
                throw DataError("thresholds must be finite and nonnegative, got " + format_double(k));
            }
        }
        const Transform transform = transform_of(args.draws);
        const PosteriorDraws draws = read_draws(manifest, args.draws);
        ensure_dir(args.out);
        write_csv(args.out / "tail.csv", {"k", "point", "ci_low", "ci_high"}, [&](CsvWriter& csv) {
            for (double k : ks) {
                const TailEstimate t = tail_estimate(draws, transform_value(k, transform), args.level);
                csv.field(k).field(t.point).field(t.ci_low).field(t.ci_high);
                csv.end_row();
            }
        });
        manifest.write(args.out,
                       json{{"k", ks}, {"level", args.level}, {"transform", std::string(to_string(transform))}}, 0);
        out << "tail: " << ks.size() << " thresholds written to " << (args.out / "tail.csv").string() << "\n";
    });
}

//==========================================================================
// calibrate
//==========================================================================

int cmd_calibrate(const CalibrateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded("calibrate", err, [&] {
        Manifest manifest("calibrate");
        if (args.n_components < 1) {
            throw ConfigError("--J must be at least 1");
        }
        if (!(args.omega > 0.0 && args.omega < 1.0)) {
            throw ConfigError("--omega must lie in (0, 1)");
        }
        const Observations y = read_observations(manifest, "data", args.data).transformed(args.transform);
        const Calibration cal = calibrate(y, CalibrationInput{args.omega, args.n_components});
        json result = to_json(cal.hyper);
        result["theta_tilde"] = cal.theta_tilde;
        result["spans_range"] = cal.spans_range;
        result["warnings"] = cal.warnings;
        for (const auto& w : cal.warnings) {
            err << "calibrate: warning: " << w << "\n";
        }
        out << dump_json(result);
        if (args.out) {
            ensure_dir(*args.out);
            write_file(*args.out / "calibration.json", dump_json(result));
            manifest.write(*args.out,
                           json{{"J", args.n_components},
                                {"omega", args.omega},
                                {"transform", std::string(to_string(args.transform))}},
                           0);
        }
    });
}

//==========================================================================
// simulate
//==========================================================================

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded("simulate", err, [&] {
        Manifest manifest("simulate");
        if (args.population.has_value() == args.generator.has_value()) {
            throw ConfigError("give exactly one of --population or --generator");
        }
        SimulateConfig config =
            parse_simulate_config(parse_json(manifest.read_input("config", args.config), args.config.string()));
        if (args.seed) {
            config.experiment.seed = *args.seed;
            config.experiment.chain.seed = *args.seed;
        }
        if (args.jobs) {
            config.experiment.jobs = std::max<std::size_t>(1, *args.jobs);
        }

        json generator_spec;
        Observations population;
        if (args.population) {
            population = read_observations(manifest, "population", *args.population);
        } else {
            const std::string& g = *args.generator;
            const bool inline_json = g.find_first_not_of(" \t\r\n") != std::string::npos &&
                                     g[g.find_first_not_of(" \t\r\n")] == '{';
            generator_spec = parse_json(inline_json ? g : manifest.read_input("generator", g), "generator");
            population = generate_population(generator_spec, config.experiment.seed);
        }
        resolve_thresholds(config, population);
        logger()->info("simulate: N={} replicates={} thresholds={}", population.size(),
                       config.experiment.n_replicates, config.experiment.thresholds.size());

        const ResultTable table = run_experiment(population, config.experiment);
        ensure_dir(args.out);
        std::ostringstream results, audit, exclusions;
        write_results_csv(results, table);
        write_audit_csv(audit, table);
        write_exclusions_csv(exclusions, table);
        write_file(args.out / "results.csv", results.str());
        write_file(args.out / "audit.csv", audit.str());
        write_file(args.out / "exclusions.csv", exclusions.str());

        json resolved = to_json(config.experiment);
        if (!config.threshold_quantiles.empty()) {
            resolved["threshold_quantiles"] = config.threshold_quantiles;
        }
        if (!generator_spec.is_null()) {
            resolved["generator"] = generator_spec;
        }
        manifest.write(args.out, resolved, config.experiment.seed);
        if (!table.exclusions.empty()) {
            err << "simulate: " << table.exclusions.size() << " replicate fits excluded (see exclusions.csv)\n";
        }
        out << "simulate: " << table.cells.size() << " result rows written to " << args.out.string() << "\n";
    });
}

//==========================================================================
// diagnose
//==========================================================================

int cmd_diagnose(const DiagnoseArgs& args, std::ostream& out, std::ostream& err) {
    return guarded("diagnose", err, [&] {
        Manifest manifest("diagnose");
        const Transform transform = transform_of(args.draws);
        const PosteriorDraws draws = read_draws(manifest, args.draws);
        const Observations raw = read_observations(manifest, "data", args.data);
        const Observations y = raw.transformed(transform);
        if (draws.size() < 2) {
            throw DataError("diagnose needs at least two draws");
        }
        ensure_dir(args.out);

        write_density(args.out / "density.csv", draws, transform, raw.max());

        // Transforms are increasing, so sorted raw values line up with sorted fitted values.
        const QQProbabilities qq = qq_probabilities(draws, y);
        std::vector<double> sorted_raw(raw.values().begin(), raw.values().end());
        std::sort(sorted_raw.begin(), sorted_raw.end());
        write_csv(args.out / "qq.csv", {"y", "empirical_p", "model_p"}, [&](CsvWriter& csv) {
            for (std::size_t i = 0; i < qq.sorted_y.size(); ++i) {
                csv.field(sorted_raw[i]).field(qq.empirical_p[i]).field(qq.model_p[i]);
                csv.end_row();
            }
        });

        const WeightSummary summary = weight_summary(draws);
        write_csv(args.out / "weights.csv", {"component", "posterior_mean_weight"}, [&](CsvWriter& csv) {
            for (std::size_t j = 0; j < summary.posterior_mean_weights.size(); ++j) {
                csv.field(j + 1).field(summary.posterior_mean_weights[j]);
                csv.end_row();
            }
        });
        write_csv(args.out / "occupied.csv", {"occupied", "frequency"}, [&](CsvWriter& csv) {
            for (const auto& [count, freq] : summary.occupied_histogram) {
                csv.field(count).field(freq);
                csv.end_row();
            }
        });

        const auto means = moment_trace(draws, 1);
        const auto variances = moment_trace(draws, 2);
        write_csv(args.out / "traces.csv", {"draw", "theta", "mean", "variance", "occupied"}, [&](CsvWriter& csv) {
            for (std::size_t m = 0; m < draws.size(); ++m) {
                csv.field(m + 1)
                    .field(draws.theta_draws()[m])
                    .field(means[m])
                    .field(variances[m])
                    .field(draws.occupied_counts()[m]);
                csv.end_row();
            }
        });

        const DiagnosticReport report = diagnose_fit(draws, y);
        write_file(args.out / "diagnostics.json", dump_json(to_json(report)));
        for (const auto& flag : report.flags) {
            err << "diagnose: flag: " << flag << "\n";
        }
        manifest.write(args.out, json{{"transform", std::string(to_string(transform))}}, 0);
        out << "diagnose: outputs written to " << args.out.string() << "\n";
    });
}

//==========================================================================
// Command line
//==========================================================================

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gamma shape mixture fitting and exceedance estimation", "gsm-tail"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TOOL_VERSION);

    FitArgs fit;
    std::uint64_t fit_seed = 0;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the model to a single-column CSV of positive values");
    fit_cmd->add_option("data", fit.data, "Data CSV")->required();
    auto* fit_config_opt = fit_cmd->add_option("--config", fit.config, "Fit config JSON");
    (void)fit_config_opt;
    fit_cmd->add_option("--out", fit.out, "Output directory")->required();
    auto* fit_seed_opt = fit_cmd->add_option("--seed", fit_seed, "Override the config seed");

    TailArgs tail;
    auto* tail_cmd = app.add_subcommand("tail", "Exceedance probabilities with credible intervals");
    tail_cmd->add_option("draws", tail.draws, "draws.json written by fit")->required();
    tail_cmd->add_option("--k", tail.k, "Thresholds in original units")->delimiter(',');
    tail_cmd->add_option("--k-file", tail.k_file, "CSV of thresholds");
    tail_cmd->add_option("--out", tail.out, "Output directory")->required();
    tail_cmd->add_option("--level", tail.level, "Credible level")->capture_default_str();

    CalibrateArgs cal;
    std::string cal_transform = "identity";
    auto* cal_cmd = app.add_subcommand("calibrate", "Suggest (alpha, beta) for a data set");
    cal_cmd->add_option("data", cal.data, "Data CSV")->required();
    cal_cmd->add_option("--J", cal.n_components, "Number of components")->capture_default_str();
    cal_cmd->add_option("--omega", cal.omega, "Prior weight in (0, 1)")->capture_default_str();
    cal_cmd->add_option("--transform", cal_transform, "identity or cube_root")->capture_default_str();
    cal_cmd->add_option("--out", cal.out, "Also write calibration.json and a manifest here");

    SimulateArgs sim;
    std::uint64_t sim_seed = 0;
    std::size_t sim_jobs = 1;
    auto* sim_cmd = app.add_subcommand("simulate", "Replicated train/test comparison against baselines");
    sim_cmd->add_option("--population", sim.population, "Population CSV");
    sim_cmd->add_option("--generator", sim.generator, "Generator spec (JSON file or inline JSON)");
    sim_cmd->add_option("--config", sim.config, "Experiment config JSON")->required();
    sim_cmd->add_option("--out", sim.out, "Output directory")->required();
    auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Override the config seed");
    auto* sim_jobs_opt = sim_cmd->add_option("--jobs", sim_jobs, "Worker threads");

    DiagnoseArgs diag;
    auto* diag_cmd = app.add_subcommand("diagnose", "Plot data and posterior checks for a fit");
    diag_cmd->add_option("draws", diag.draws, "draws.json written by fit")->required();
    diag_cmd->add_option("data", diag.data, "Data CSV the draws were fitted to")->required();
    diag_cmd->add_option("--out", diag.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? EXIT_OK : EXIT_CONFIG;
    }

    if (fit_cmd->parsed()) {
        if (fit_seed_opt->count() > 0) {
            fit.seed = fit_seed;
        }
        return cmd_fit(fit, out, err);
    }
    if (tail_cmd->parsed()) {
        return cmd_tail(tail, out, err);
    }
    if (cal_cmd->parsed()) {
        try {
            cal.transform = parse_transform(cal_transform);
        } catch (const std::invalid_argument& e) {
            err << "calibrate: config error: " << e.what() << "\n";
            return EXIT_CONFIG;
        }
        return cmd_calibrate(cal, out, err);
    }
    if (sim_cmd->parsed()) {
        if (sim_seed_opt->count() > 0) {
            sim.seed = sim_seed;
        }
        if (sim_jobs_opt->count() > 0) {
            sim.jobs = sim_jobs;
        }
        return cmd_simulate(sim, out, err);
    }
    return cmd_diagnose(diag, out, err);
}

}  // namespace gsm::cli
