#include "gsm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "gsm/inference.hpp"
#include "gsm/io.hpp"

namespace gsm {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::edf:
            return "EDF";
        case Method::lognormal:
            return "LN";
        case Method::normal_mixture:
            return "MN";
        case Method::gsm:
            return "GSM";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (thresholds.empty()) {
        throw std::invalid_argument("experiment: at least one threshold is required");
    }
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        if (!std::isfinite(thresholds[t]) || thresholds[t] < 0.0) {
            throw std::invalid_argument("experiment: thresholds must be nonnegative");
        }
        if (t > 0 && thresholds[t] <= thresholds[t - 1]) {
            throw std::invalid_argument("experiment: thresholds must be strictly ascending");
        }
    }
    if (n_replicates < 1) {
        throw std::invalid_argument("experiment: n_replicates must be positive");
    }
    if (!(training_fraction > 0.0 && training_fraction < 1.0)) {
        throw std::invalid_argument("experiment: training_fraction must lie in (0, 1)");
    }
    chain.validate();
    if (const auto* explicit_hyper = std::get_if<Hyperparams>(&hyper_source)) {
        explicit_hyper->validate();
    } else {
        const auto& input = std::get<CalibrationInput>(hyper_source);
        if (!(input.omega > 0.0 && input.omega < 1.0) || input.n_components < 1) {
            throw std::invalid_argument("experiment: calibration needs omega in (0, 1) and J >= 1");
        }
    }
}

const ResultCell& ResultTable::cell(Method m, std::size_t threshold_index) const {
    const auto method_index = static_cast<std::size_t>(m);
    return cells.at(method_index * thresholds.size() + threshold_index);
}

Split split_replicate(const Observations& population, double training_fraction, RngStream& rng) {
    const std::size_t n = population.size();
    if (n < 20) {
        throw std::invalid_argument("split_replicate: population must have at least 20 values");
    }
    const auto n_train = static_cast<std::size_t>(std::floor(training_fraction * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n) {
        throw std::invalid_argument("split_replicate: training fraction leaves an empty side");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_train; ++i) {
        std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
    }
    Split split;
    split.train_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.test_indices.begin(), split.test_indices.end());

    auto gather = [&](const std::vector<std::size_t>& which) {
        std::vector<double> out(which.size());
        for (std::size_t i = 0; i < which.size(); ++i) {
            out[i] = population[which[i]];
        }
        return Observations(std::move(out), population.transform());
    };
    split.train = gather(split.train_indices);
    split.test = gather(split.test_indices);
    return split;
}

Split split_replicate(const Observations& population, std::size_t replicate, const ExperimentConfig& config) {
    RngStream rng(config.seed, replicate);
    return split_replicate(population, config.training_fraction, rng);
}

std::vector<double> apply_transform(std::span<const double> y, Transform t) {
    std::vector<double> out(y.size());
    std::transform(y.begin(), y.end(), out.begin(), [t](double v) { return transform_value(v, t); });
    return out;
}

double threshold_transform(double k, Transform t) {
    return transform_value(k, t);
}

namespace {

constexpr std::size_t N_METHODS = 4;

struct ReplicateRecord {
    std::vector<double> p_true;
    // estimates[method][threshold]; empty vector for a failed method.
    std::vector<double> estimates[N_METHODS];
    std::vector<Exclusion> exclusions;
};

ReplicateRecord run_replicate(const Observations& population, std::size_t r, const ExperimentConfig& config) {
    RngStream rng(config.seed, r);
    const Split split = split_replicate(population, config.training_fraction, rng);
    const Observations train = split.train.transformed(config.transform);

    std::vector<double> k_transformed(config.thresholds.size());
    ReplicateRecord record;
    record.p_true.resize(config.thresholds.size());
    for (std::size_t t = 0; t < config.thresholds.size(); ++t) {
        record.p_true[t] = edf_tail(split.test.values(), config.thresholds[t]);
        k_transformed[t] = threshold_transform(config.thresholds[t], config.transform);
    }

    auto attempt = [&](Method m, auto&& evaluate) {
        auto& slot = record.estimates[static_cast<std::size_t>(m)];
        try {
            slot = evaluate();
        } catch (const std::exception& e) {
            slot.clear();
            record.exclusions.push_back({r, m, e.what()});
        }
    };

    attempt(Method::edf, [&] {
        std::vector<double> out;
        for (double k : k_transformed) {
            out.push_back(edf_tail(train.values(), k));
        }
        return out;
    });
    attempt(Method::lognormal, [&] {
        const LogNormalFit fit = lognormal_fit(train.values());
        std::vector<double> out;
        for (double k : k_transformed) {
            out.push_back(lognormal_tail(fit, k));
        }
        return out;
    });
    attempt(Method::normal_mixture, [&] {
        NormalMixtureOptions options = config.mixture;
        options.k_max = std::max<std::size_t>(1, std::min(options.k_max, train.size() / 2));
        const NormalMixtureFit fit = normal_mixture_fit(train.values(), rng, options);
        std::vector<double> out;
        for (double k : k_transformed) {
            out.push_back(normal_mixture_tail(fit, k));
        }
        return out;
    });
    attempt(Method::gsm, [&] {
        Hyperparams hyper;
        if (const auto* explicit_hyper = std::get_if<Hyperparams>(&config.hyper_source)) {
            hyper = *explicit_hyper;
        } else {
            hyper = calibrate(train, std::get<CalibrationInput>(config.hyper_source)).hyper;
        }
        const PosteriorDraws draws = run_chain(train, hyper, config.chain, rng);
        std::vector<double> out;
        for (double k : k_transformed) {
            out.push_back(tail_estimate(draws, k).point);
        }
        return out;
    });
    return record;
}

double mean_of(std::span<const double> v) {
    return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ResultTable run_experiment(const Observations& population, const ExperimentConfig& config) {
    config.validate();
    if (population.transform() != Transform::identity) {
        throw std::invalid_argument("run_experiment: population must be in original units");
    }

    std::vector<ReplicateRecord> records(config.n_replicates);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (std::size_t r = next++; r < config.n_replicates; r = next++) {
            try {
                records[r] = run_replicate(population, r, config);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, config.n_replicates);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < jobs; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    ResultTable table;
    table.thresholds = config.thresholds;
    table.n_replicates = config.n_replicates;
    for (const auto& record : records) {
        table.exclusions.insert(table.exclusions.end(), record.exclusions.begin(), record.exclusions.end());
    }

    const auto edf_index = static_cast<std::size_t>(Method::edf);
    for (Method m : ALL_METHODS) {
        const auto mi = static_cast<std::size_t>(m);
        for (std::size_t t = 0; t < config.thresholds.size(); ++t) {
            ResultCell cell;
            cell.method = m;
            cell.threshold = config.thresholds[t];
            double se_method = 0.0;
            double se_edf = 0.0;
            double abs_sum = 0.0;
            for (std::size_t r = 0; r < records.size(); ++r) {
                const auto& est = records[r].estimates[mi];
                const auto& edf = records[r].estimates[edf_index];
                if (est.empty() || edf.empty()) {
                    continue;
                }
                const double truth = records[r].p_true[t];
                cell.replicates.push_back(r);
                cell.estimates.push_back(est[t]);
                cell.truths.push_back(truth);
                se_method += (est[t] - truth) * (est[t] - truth);
                se_edf += (edf[t] - truth) * (edf[t] - truth);
                abs_sum += std::fabs(est[t] - truth);
            }
            const std::size_t n_ok = cell.n_ok();
            const std::size_t excluded = config.n_replicates - n_ok;
            if (static_cast<double>(excluded) > MAX_EXCLUDED_FRACTION * static_cast<double>(config.n_replicates)) {
                throw ExperimentError(std::string(to_string(m)) + " at threshold " + format_double(cell.threshold) +
                                      ": " + std::to_string(excluded) + " of " +
                                      std::to_string(config.n_replicates) + " replicates excluded");
            }
            const auto count = static_cast<double>(n_ok);
            cell.mse = se_method / count;
            cell.mean_abs_error = abs_sum / count;
            const double mse_edf = se_edf / count;
            cell.relative_mse_pct = mse_edf > 0.0 ? relative_mse(mse_edf, cell.mse) : std::nan("");
            const double mean_truth = mean_of(cell.truths);
            cell.relative_bias_pct = mean_truth > 0.0 ? relative_bias(cell.estimates, mean_truth) : std::nan("");
            table.cells.push_back(std::move(cell));
        }
    }
    return table;
}

void write_results_csv(std::ostream& out, const ResultTable& table) {
    CsvWriter csv(out, {"method", "threshold", "rel_mse_pct", "rel_bias_pct", "n_ok"});
    for (const auto& cell : table.cells) {
        csv.field(to_string(cell.method))
            .field(cell.threshold)
            .field(cell.relative_mse_pct)
            .field(cell.relative_bias_pct)
            .field(cell.n_ok());
        csv.end_row();
    }
}

void write_audit_csv(std::ostream& out, const ResultTable& table) {
    CsvWriter csv(out, {"replicate", "method", "threshold", "abs_err_method", "abs_err_gsm"});
    for (std::size_t t = 0; t < table.thresholds.size(); ++t) {
        const ResultCell& gsm_cell = table.cell(Method::gsm, t);
        for (Method m : {Method::edf, Method::lognormal, Method::normal_mixture}) {
            const ResultCell& cell = table.cell(m, t);
            std::size_t g = 0;
            for (std::size_t i = 0; i < cell.replicates.size(); ++i) {
                while (g < gsm_cell.replicates.size() && gsm_cell.replicates[g] < cell.replicates[i]) {
                    ++g;
                }
                if (g == gsm_cell.replicates.size() || gsm_cell.replicates[g] != cell.replicates[i]) {
                    continue;
                }
                csv.field(cell.replicates[i])
                    .field(to_string(m))
                    .field(cell.threshold)
                    .field(std::fabs(cell.estimates[i] - cell.truths[i]))
                    .field(std::fabs(gsm_cell.estimates[g] - gsm_cell.truths[g]));
                csv.end_row();
            }
        }
    }
}

void write_exclusions_csv(std::ostream& out, const ResultTable& table) {
    CsvWriter csv(out, {"replicate", "method", "reason"});
    for (const auto& e : table.exclusions) {
        csv.field(e.replicate).field(to_string(e.method)).field(e.reason);
        csv.end_row();
    }
}

}  // namespace gsm
