#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "gsm/model.hpp"
#include "gsm/observations.hpp"
#include "gsm/sampler.hpp"

namespace gsm {

//! Empirical quantile with linear interpolation between order statistics
//! (h = (n - 1) p + 1, "type 7"). \p values need not be sorted.
double quantile(std::span<const double> values, double p);

//! Rao-Blackwellized exceedance estimate P(y* > k | y) with an equal-tailed credible interval.
struct TailEstimate {
    double threshold;
    double point;
    double ci_low;
    double ci_high;
    std::vector<double> per_draw;
};

TailEstimate tail_estimate(const PosteriorDraws& draws, double k, double level = 0.95);

//! Posterior mean of the density at each grid point (average of per-draw densities).
std::vector<double> density_curve(const PosteriorDraws& draws, std::span<const double> grid);

struct QQProbabilities {
    std::vector<double> sorted_y;
    std::vector<double> model_p;
    std::vector<double> empirical_p;
};

//! Model CDF at the posterior-mean (weights, theta) against i / (n + 1).
QQProbabilities qq_probabilities(const PosteriorDraws& draws, const Observations& y);

struct WeightSummary {
    std::vector<double> posterior_mean_weights;
    std::map<std::size_t, double> occupied_histogram;
};

WeightSummary weight_summary(const PosteriorDraws& draws);

//! Per-draw model mean (order 1) or model variance (order 2).
std::vector<double> moment_trace(const PosteriorDraws& draws, unsigned order);

//! Posterior mean parameters: mean of weight rows (renormalized) and mean of theta.
GsmParams posterior_mean_params(const PosteriorDraws& draws);

//! Batch-means Monte Carlo standard error of the mean of a chain trace.
double batch_means_se(std::span<const double> trace, std::size_t n_batches = 20);

}  // namespace gsm
