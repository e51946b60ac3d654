#include <cmath>
#include <set>
#include <string>

#include "gsm/cli.hpp"
#include "gsm/inference.hpp"
#include "gsm/io.hpp"
#include "gsm/model.hpp"

namespace gsm::cli {

using nlohmann::json;

namespace {

// Typed access to a JSON object; remembers which keys were read so that
// leftovers can be reported as unknown.
class ConfigReader {
public:
    ConfigReader(const json& j, std::string what) : j_(j), what_(std::move(what)) {
        if (!j_.is_object()) {
            fail("expected a JSON object");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    std::optional<std::uint64_t> count(const char* key) {
        const json* v = take(key);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
            fail(std::string("'") + key + "' must be a nonnegative integer");
        }
        return v->get<std::uint64_t>();
    }

    std::optional<double> number(const char* key) {
        const json* v = take(key);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_number()) {
            fail(std::string("'") + key + "' must be a number");
        }
        return v->get<double>();
    }

    std::optional<std::string> text(const char* key) {
        const json* v = take(key);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_string()) {
            fail(std::string("'") + key + "' must be a string");
        }
        return v->get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const char* key) {
        const json* v = take(key);
        if (!v) {
            return std::nullopt;
        }
        if (!v->is_array()) {
            fail(std::string("'") + key + "' must be an array of numbers");
        }
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) {
                fail(std::string("'") + key + "' must be an array of numbers");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    const json* object(const char* key) {
        const json* v = take(key);
        if (v && !v->is_object()) {
            fail(std::string("'") + key + "' must be an object");
        }
        return v;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) {
                fail("unknown key '" + key + "'");
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(what_ + ": " + msg); }

private:
    const json* take(const char* key) {
        used_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    const json& j_;
    std::string what_;
    std::set<std::string> used_;
};

template <typename F>
auto as_config_error(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(what + ": " + e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

// Shared hyperparameter and chain keys of fit and simulate configs.
std::variant<Hyperparams, double> read_hyper_source(ConfigReader& r, std::size_t J) {
    const auto alpha = r.count("alpha");
    const auto beta = r.number("beta");
    const auto omega = r.number("omega");
    if (alpha.has_value() != beta.has_value()) {
        r.fail("'alpha' and 'beta' must be given together");
    }
    if (alpha && omega) {
        r.fail("give either 'alpha'/'beta' or 'omega', not both");
    }
    if (alpha) {
        Hyperparams h{J, static_cast<std::int64_t>(*alpha), *beta};
        as_config_error("hyperparameters", [&] {
            h.validate();
            return 0;
        });
        return h;
    }
    const double w = omega.value_or(DEFAULT_PRIOR_WEIGHT);
    if (!(w > 0.0 && w < 1.0)) {
        r.fail("'omega' must lie in (0, 1)");
    }
    return w;
}

ChainConfig read_chain(ConfigReader& r, ChainConfig chain) {
    chain.iterations = r.count("iterations").value_or(chain.iterations);
    chain.burn_in = r.count("burn_in").value_or(chain.burn_in);
    chain.thin = r.count("thin").value_or(chain.thin);
    chain.seed = r.count("seed").value_or(chain.seed);
    if (const auto v = r.text("variant")) {
        chain.variant = as_config_error("variant", [&] { return parse_variant(*v); });
    }
    as_config_error("chain", [&] {
        chain.validate();
        return 0;
    });
    return chain;
}

Transform read_transform(ConfigReader& r) {
    const auto t = r.text("transform");
    return t ? as_config_error("transform", [&] { return parse_transform(*t); }) : Transform::identity;
}

}  // namespace

FitConfig parse_fit_config(const json& j) {
    ConfigReader r(j, "fit config");
    FitConfig config;
    config.n_components = r.count("J").value_or(config.n_components);
    if (config.n_components < 1) {
        r.fail("'J' must be at least 1");
    }
    config.hyper_source = read_hyper_source(r, config.n_components);
    config.chain = read_chain(r, config.chain);
    config.transform = read_transform(r);
    r.finish();
    return config;
}

SimulateConfig parse_simulate_config(const json& j) {
    ConfigReader r(j, "experiment config");
    SimulateConfig out;
    ExperimentConfig& config = out.experiment;
    const auto thresholds = r.numbers("thresholds");
    const auto quantiles = r.numbers("threshold_quantiles");
    if (thresholds.has_value() == quantiles.has_value()) {
        r.fail("give exactly one of 'thresholds' or 'threshold_quantiles'");
    }
    if (thresholds) {
        config.thresholds = *thresholds;
    } else {
        for (double p : *quantiles) {
            if (!(p >= 0.0 && p <= 1.0)) {
                r.fail("'threshold_quantiles' must lie in [0, 1]");
            }
        }
        out.threshold_quantiles = *quantiles;
    }
    config.n_replicates = r.count("n_replicates").value_or(config.n_replicates);
    config.training_fraction = r.number("training_fraction").value_or(config.training_fraction);
    if (r.has("transform")) {
        config.transform = read_transform(r);
    }
    const std::size_t J = r.count("J").value_or(50);
    if (J < 1) {
        r.fail("'J' must be at least 1");
    }
    const auto source = read_hyper_source(r, J);
    if (std::holds_alternative<Hyperparams>(source)) {
        config.hyper_source = std::get<Hyperparams>(source);
    } else {
        config.hyper_source = CalibrationInput{std::get<double>(source), J};
    }
    config.chain = read_chain(r, config.chain);
    config.seed = config.chain.seed;
    config.mixture.k_max = r.count("k_max").value_or(config.mixture.k_max);
    config.mixture.restarts = r.count("restarts").value_or(config.mixture.restarts);
    config.mixture.max_iterations = r.count("em_max_iterations").value_or(config.mixture.max_iterations);
    config.mixture.tolerance = r.number("em_tolerance").value_or(config.mixture.tolerance);
    if (config.mixture.k_max < 1 || config.mixture.restarts < 1 || config.mixture.max_iterations < 1 ||
        !(config.mixture.tolerance > 0.0)) {
        r.fail("mixture settings must be positive");
    }
    config.jobs = r.count("jobs").value_or(config.jobs);
    r.finish();
    if (!thresholds) {
        // Validated once the population is known.
        return out;
    }
    as_config_error("experiment config", [&] {
        config.validate();
        return 0;
    });
    return out;
}

void resolve_thresholds(SimulateConfig& config, const Observations& population) {
    if (!config.threshold_quantiles.empty()) {
        config.experiment.thresholds.clear();
        for (double p : config.threshold_quantiles) {
            config.experiment.thresholds.push_back(quantile(population.values(), p));
        }
    }
    as_config_error("experiment config", [&] {
        config.experiment.validate();
        return 0;
    });
}

json to_json(const ExperimentConfig& config) {
    json j{{"thresholds", config.thresholds},
           {"n_replicates", config.n_replicates},
           {"training_fraction", config.training_fraction},
           {"transform", std::string(to_string(config.transform))},
           {"seed", config.seed},
           {"iterations", config.chain.iterations},
           {"burn_in", config.chain.burn_in},
           {"thin", config.chain.thin},
           {"variant", std::string(to_string(config.chain.variant))},
           {"k_max", config.mixture.k_max},
           {"restarts", config.mixture.restarts},
           {"em_max_iterations", config.mixture.max_iterations},
           {"em_tolerance", config.mixture.tolerance},
           {"jobs", config.jobs}};
    if (const auto* h = std::get_if<Hyperparams>(&config.hyper_source)) {
        j["J"] = h->n_components;
        j["alpha"] = h->alpha;
        j["beta"] = h->beta;
    } else {
        const auto& c = std::get<CalibrationInput>(config.hyper_source);
        j["J"] = c.n_components;
        j["omega"] = c.omega;
    }
    return j;
}

Observations generate_population(const json& spec, std::uint64_t seed) {
    ConfigReader r(spec, "generator");
    const auto n = r.count("n");
    if (!n || *n < 1) {
        r.fail("'n' must be a positive integer");
    }
    const json* gsm = r.object("gsm");
    const json* lognormal = r.object("lognormal");
    const json* pareto = r.object("pareto_mix");
    const auto on_scale = r.text("on_scale");
    if ((gsm != nullptr) + (lognormal != nullptr) + (pareto != nullptr) != 1) {
        r.fail("give exactly one of 'gsm', 'lognormal', 'pareto_mix'");
    }
    r.finish();
    const Transform scale = on_scale ? as_config_error("on_scale", [&] { return parse_transform(*on_scale); })
                                     : Transform::identity;
    if (scale != Transform::identity && !gsm) {
        r.fail("'on_scale' only applies to 'gsm'");
    }

    RngStream rng(seed, GENERATOR_STREAM);
    std::vector<double> values(*n);
    if (gsm) {
        const GsmParams params = gsm_params_from_json(*gsm);
        Observations z = sample(params, *n, rng);
        if (scale == Transform::identity) {
            return z;
        }
        // Drawn on the cube-root scale; cube back to data units.
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = z[i] * z[i] * z[i];
        }
        return Observations(std::move(values));
    }
    if (lognormal) {
        ConfigReader p(*lognormal, "generator.lognormal");
        const double mu = p.number("mu").value_or(0.0);
        const auto sigma = p.number("sigma");
        p.finish();
        if (!sigma || !(*sigma > 0.0)) {
            p.fail("'sigma' must be positive");
        }
        for (auto& v : values) {
            v = std::exp(mu + *sigma * rng.normal());
        }
        return Observations(std::move(values));
    }
    // Pareto components: x_m U^{-1/a}, chosen with the given weights.
    ConfigReader p(*pareto, "generator.pareto_mix");
    const auto weights = p.numbers("weights");
    const auto scales = p.numbers("scales");
    const auto shapes = p.numbers("shapes");
    p.finish();
    if (!weights || !scales || !shapes || weights->empty() || weights->size() != scales->size() ||
        weights->size() != shapes->size()) {
        p.fail("'weights', 'scales' and 'shapes' must be equally long nonempty arrays");
    }
    std::vector<double> log_w(weights->size());
    double total = 0.0;
    for (std::size_t c = 0; c < log_w.size(); ++c) {
        if (!((*weights)[c] >= 0.0) || !((*scales)[c] > 0.0) || !((*shapes)[c] > 0.0)) {
            p.fail("weights must be nonnegative, scales and shapes positive");
        }
        total += (*weights)[c];
        log_w[c] = (*weights)[c] > 0.0 ? std::log((*weights)[c]) : -INFINITY;
    }
    if (std::fabs(total - 1.0) > 1e-10) {
        p.fail("weights must sum to 1");
    }
    for (auto& v : values) {
        const std::size_t c = sample_categorical(log_w, rng);
        v = (*scales)[c] * std::pow(rng.uniform_open(), -1.0 / (*shapes)[c]);
    }
    return Observations(std::move(values));
}

}  // namespace gsm::cli
