#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "gsm/observations.hpp"
#include "gsm/sampler.hpp"

namespace gsm {

constexpr double DEFAULT_PRIOR_WEIGHT = 0.3;

struct CalibrationInput {
    //! Weight of the prior mean in the posterior mean of theta, in (0, 1).
    double omega = DEFAULT_PRIOR_WEIGHT;
    std::size_t n_components = 1;
};

struct ThetaSuggestion {
    double theta_tilde;
    //! True when the first component mean 1/theta_tilde does not exceed min(y).
    bool spans_range;
};

//! theta_tilde = J / max(y).
ThetaSuggestion suggest_theta_tilde(const Observations& y, std::size_t n_components);

struct Calibration {
    Hyperparams hyper;
    double theta_tilde;
    bool spans_range;
    std::vector<std::string> warnings;
};

//! beta = omega * sum(y) / (1 - omega); alpha = max(1, round(theta_tilde * beta)),
//! rounding half away from zero. A failed range check is reported as a warning.
Calibration calibrate(const Observations& y, const CalibrationInput& input);

//! Posterior-predictive checks on the fitted moments and on the adequacy of J.
struct DiagnosticReport {
    std::vector<double> mean_draws;
    std::vector<double> var_draws;
    double sample_mean = 0.0;
    double sample_var = 0.0;
    std::map<std::size_t, double> occupied_hist;
    //! Highest component whose posterior mean weight is at least HEAVY_WEIGHT.
    std::size_t heaviest_used_component = 0;
    std::vector<std::string> flags;
};

inline constexpr const char* FLAG_MEAN = "sample_mean_outside_posterior_99";
inline constexpr const char* FLAG_VARIANCE = "sample_variance_outside_posterior_99";
inline constexpr const char* FLAG_J_TOO_SMALL = "heaviest_component_above_0.9J";

//! Posterior mean weight above which a component counts as used by diagnose_fit.
inline constexpr double HEAVY_WEIGHT = 0.01;

//! y must be in the scale the draws were fitted on. Requires at least two draws.
DiagnosticReport diagnose_fit(const PosteriorDraws& draws, const Observations& y);

}  // namespace gsm
