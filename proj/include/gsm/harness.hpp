#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gsm/baselines.hpp"
#include "gsm/calibrate.hpp"
#include "gsm/observations.hpp"
#include "gsm/sampler.hpp"

namespace gsm {

enum class Method { edf, lognormal, normal_mixture, gsm };

inline constexpr Method ALL_METHODS[] = {Method::edf, Method::lognormal, Method::normal_mixture, Method::gsm};

//! "EDF", "LN", "MN", "GSM".
std::string_view to_string(Method m);

//! Replicated train/test experiment settings. Thresholds are in original data units.
struct ExperimentConfig {
    std::vector<double> thresholds;
    std::size_t n_replicates = 50;
    double training_fraction = 0.10;
    Transform transform = Transform::cube_root;
    std::uint64_t seed = 1;
    ChainConfig chain{2000, 500, Variant::collapsed, 1, 1};
    //! Explicit hyperparameters, or per-replicate calibration on the (transformed) training set.
    std::variant<Hyperparams, CalibrationInput> hyper_source = CalibrationInput{DEFAULT_PRIOR_WEIGHT, 50};
    NormalMixtureOptions mixture;
    //! Worker threads; results do not depend on it.
    std::size_t jobs = 1;

    void validate() const;
};

struct Split {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    Observations train;
    Observations test;
};

//! Simple random sample without replacement of floor(fraction N) training indices
//! drawn from \p rng; the complement is the test set. Indices are returned ascending.
Split split_replicate(const Observations& population, double training_fraction, RngStream& rng);
//! Split for replicate r, using RngStream(config.seed, r).
Split split_replicate(const Observations& population, std::size_t replicate, const ExperimentConfig& config);

std::vector<double> apply_transform(std::span<const double> y, Transform t);
double threshold_transform(double k, Transform t);

//! Scores for one (method, threshold) pair over the replicates where the method succeeded.
struct ResultCell {
    Method method = Method::edf;
    double threshold = 0.0;
    double mse = 0.0;
    double relative_mse_pct = 0.0;
    double relative_bias_pct = 0.0;
    double mean_abs_error = 0.0;
    std::vector<std::size_t> replicates;
    std::vector<double> estimates;
    std::vector<double> truths;

    std::size_t n_ok() const { return replicates.size(); }
};

struct Exclusion {
    std::size_t replicate;
    Method method;
    std::string reason;
};

struct ResultTable {
    std::vector<double> thresholds;
    std::size_t n_replicates = 0;
    std::vector<ResultCell> cells;  // method-major, thresholds ascending
    std::vector<Exclusion> exclusions;

    const ResultCell& cell(Method m, std::size_t threshold_index) const;
};

//! Raised when more than 5% of any cell's replicates were excluded.
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double MAX_EXCLUDED_FRACTION = 0.05;

//! Per replicate r (stream id r): split, transform the training set, compute
//! p_TRUE on the untransformed test set, fit EDF/LN/MN/GSM on the transformed
//! training set and evaluate each at the transformed thresholds.
ResultTable run_experiment(const Observations& population, const ExperimentConfig& config);

//! method,threshold,rel_mse_pct,rel_bias_pct,n_ok
void write_results_csv(std::ostream& out, const ResultTable& table);
//! replicate,method,threshold,abs_err_method,abs_err_gsm
void write_audit_csv(std::ostream& out, const ResultTable& table);
//! replicate,method,reason
void write_exclusions_csv(std::ostream& out, const ResultTable& table);

}  // namespace gsm
