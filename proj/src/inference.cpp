#include "gsm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gsm {

double quantile(std::span<const double> values, double p) {
    if (values.empty()) {
        throw std::invalid_argument("quantile: empty input");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("quantile: probability outside [0, 1]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

TailEstimate tail_estimate(const PosteriorDraws& draws, double k, double level) {
    if (draws.size() == 0) {
        throw std::invalid_argument("tail_estimate: no draws");
    }
    if (std::isnan(k) || k < 0.0) {
        throw std::domain_error("tail_estimate: threshold must be nonnegative");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw std::domain_error("tail_estimate: level must be in (0, 1)");
    }
    TailEstimate out{k, 0.0, 0.0, 0.0, std::vector<double>(draws.size())};
    for (std::size_t m = 0; m < draws.size(); ++m) {
        out.per_draw[m] = tail_prob(draws.params(m), k);
    }
    out.point = std::accumulate(out.per_draw.begin(), out.per_draw.end(), 0.0) / static_cast<double>(draws.size());
    const double alpha = 1.0 - level;
    out.ci_low = quantile(out.per_draw, alpha / 2.0);
    out.ci_high = quantile(out.per_draw, 1.0 - alpha / 2.0);
    return out;
}

std::vector<double> density_curve(const PosteriorDraws& draws, std::span<const double> grid) {
    if (draws.size() == 0) {
        throw std::invalid_argument("density_curve: no draws");
    }
    for (double g : grid) {
        if (!(g > 0.0)) {
            throw std::domain_error("density_curve: grid points must be strictly positive");
        }
    }
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t m = 0; m < draws.size(); ++m) {
        const GsmParams params = draws.params(m);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            out[g] += density(params, grid[g]);
        }
    }
    for (double& v : out) {
        v /= static_cast<double>(draws.size());
    }
    return out;
}

GsmParams posterior_mean_params(const PosteriorDraws& draws) {
    if (draws.size() == 0) {
        throw std::invalid_argument("posterior_mean_params: no draws");
    }
    std::vector<double> weights(draws.n_components(), 0.0);
    for (std::size_t m = 0; m < draws.size(); ++m) {
        const auto row = draws.weights(m);
        for (std::size_t j = 0; j < weights.size(); ++j) {
            weights[j] += row[j];
        }
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) {
        w /= total;
    }
    const auto thetas = draws.theta_draws();
    const double theta = std::accumulate(thetas.begin(), thetas.end(), 0.0) / static_cast<double>(thetas.size());
    return GsmParams(std::move(weights), theta);
}

QQProbabilities qq_probabilities(const PosteriorDraws& draws, const Observations& y) {
    const GsmParams params = posterior_mean_params(draws);
    QQProbabilities out;
    out.sorted_y.assign(y.values().begin(), y.values().end());
    std::sort(out.sorted_y.begin(), out.sorted_y.end());
    const auto n = static_cast<double>(out.sorted_y.size());
    out.model_p.resize(out.sorted_y.size());
    out.empirical_p.resize(out.sorted_y.size());
    for (std::size_t i = 0; i < out.sorted_y.size(); ++i) {
        out.empirical_p[i] = static_cast<double>(i + 1) / (n + 1.0);
        out.model_p[i] = cdf(params, out.sorted_y[i]);
    }
    return out;
}

WeightSummary weight_summary(const PosteriorDraws& draws) {
    WeightSummary out;
    const GsmParams mean = posterior_mean_params(draws);
    out.posterior_mean_weights.assign(mean.weights().begin(), mean.weights().end());
    const double share = 1.0 / static_cast<double>(draws.size());
    for (std::size_t count : draws.occupied_counts()) {
        out.occupied_histogram[count] += share;
    }
    return out;
}

std::vector<double> moment_trace(const PosteriorDraws& draws, unsigned order) {
    if (order != 1 && order != 2) {
        throw std::invalid_argument("moment_trace: order must be 1 (mean) or 2 (variance)");
    }
    std::vector<double> out(draws.size());
    for (std::size_t m = 0; m < draws.size(); ++m) {
        const GsmParams params = draws.params(m);
        out[m] = order == 1 ? model_mean(params) : model_variance(params);
    }
    return out;
}

double batch_means_se(std::span<const double> trace, std::size_t n_batches) {
    if (n_batches < 2 || trace.size() < n_batches) {
        throw std::invalid_argument("batch_means_se: need at least one draw per batch and two batches");
    }
    const std::size_t batch = trace.size() / n_batches;
    std::vector<double> means(n_batches, 0.0);
    for (std::size_t b = 0; b < n_batches; ++b) {
        for (std::size_t t = 0; t < batch; ++t) {
            means[b] += trace[b * batch + t];
        }
        means[b] /= static_cast<double>(batch);
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(n_batches);
    double ss = 0.0;
    for (double m : means) {
        ss += (m - grand) * (m - grand);
    }
    const double var = ss / static_cast<double>(n_batches - 1);
    return std::sqrt(var / static_cast<double>(n_batches));
}

}  // namespace gsm
