#include "gsm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace gsm {

double edf_tail(std::span<const double> y, double k) {
    if (y.empty()) {
        throw std::invalid_argument("edf_tail: empty sample");
    }
    const auto above = std::count_if(y.begin(), y.end(), [k](double v) { return v > k; });
    return static_cast<double>(above) / static_cast<double>(y.size());
}

LogNormalFit lognormal_fit(std::span<const double> y) {
    if (y.empty()) {
        throw std::invalid_argument("lognormal_fit: empty sample");
    }
    double sum = 0.0;
    for (double v : y) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("lognormal_fit: values must be strictly positive");
        }
        sum += std::log(v);
    }
    const auto n = static_cast<double>(y.size());
    const double mu = sum / n;
    double ss = 0.0;
    for (double v : y) {
        const double d = std::log(v) - mu;
        ss += d * d;
    }
    const double sigma = std::sqrt(ss / n);
    if (!(sigma > 0.0)) {
        throw std::domain_error("lognormal_fit: degenerate sample (all values equal)");
    }
    return {mu, sigma};
}

double lognormal_tail(const LogNormalFit& fit, double k) {
    if (k <= 0.0) {
        return 1.0;
    }
    return normal_sf((std::log(k) - fit.mu_hat) / fit.sigma_hat);
}

MixtureFitError::MixtureFitError(std::size_t n_components, const std::string& what)
    : std::runtime_error("normal mixture with K=" + std::to_string(n_components) + ": " + what),
      n_components_(n_components) {}

namespace {

constexpr double LOG_SQRT_2PI = 0.91893853320467274178;

struct EmState {
    std::vector<double> means;
    std::vector<double> sds;
    std::vector<double> weights;
    double log_likelihood = -std::numeric_limits<double>::infinity();
};

// Returns false if a component collapses or the likelihood stops being finite.
bool run_em(std::span<const double> y, EmState& state, double variance_floor, const NormalMixtureOptions& options) {
    const std::size_t k = state.means.size();
    const std::size_t n = y.size();
    std::vector<double> resp(n * k);
    std::vector<double> log_terms(k);
    std::vector<double> log_norm(k);
    double previous = -std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        for (std::size_t c = 0; c < k; ++c) {
            log_norm[c] = std::log(state.weights[c]) - std::log(state.sds[c]) - LOG_SQRT_2PI;
        }
        double loglik = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double z = (y[i] - state.means[c]) / state.sds[c];
                log_terms[c] = log_norm[c] - 0.5 * z * z;
                top = std::max(top, log_terms[c]);
            }
            double total = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                log_terms[c] = std::exp(log_terms[c] - top);
                total += log_terms[c];
            }
            loglik += top + std::log(total);
            for (std::size_t c = 0; c < k; ++c) {
                resp[i * k + c] = log_terms[c] / total;
            }
        }
        if (!std::isfinite(loglik)) {
            return false;
        }
        state.log_likelihood = loglik;
        if (std::fabs(loglik - previous) < options.tolerance) {
            return true;
        }
        previous = loglik;

        for (std::size_t c = 0; c < k; ++c) {
            double nk = 0.0;
            double weighted_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nk += resp[i * k + c];
                weighted_sum += resp[i * k + c] * y[i];
            }
            if (!(nk > 1e-8)) {
                return false;
            }
            const double mean = weighted_sum / nk;
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = y[i] - mean;
                ss += resp[i * k + c] * d * d;
            }
            state.weights[c] = nk / static_cast<double>(n);
            state.means[c] = mean;
            state.sds[c] = std::sqrt(std::max(ss / nk, variance_floor));
        }
    }
    return std::isfinite(state.log_likelihood);
}

}  // namespace

NormalMixtureFit normal_mixture_fit_k(std::span<const double> y, std::size_t k, RngStream& rng,
                                      const NormalMixtureOptions& options) {
    if (k < 1 || y.size() < 2 * k) {
        throw std::invalid_argument("normal_mixture_fit: need n >= 2K observations");
    }
    const auto n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : y) {
        ss += (v - mean) * (v - mean);
    }
    const double variance = ss / n;
    if (!(variance > 0.0)) {
        throw MixtureFitError(k, "sample has zero variance");
    }
    const double variance_floor = 1e-8 * variance;
    std::vector<double> sorted(y.begin(), y.end());
    std::sort(sorted.begin(), sorted.end());

    EmState best;
    bool any_ok = false;
    const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
        EmState state;
        state.weights.assign(k, 1.0 / static_cast<double>(k));
        state.sds.assign(k, std::sqrt(variance));
        state.means.resize(k);
        if (r == 0) {
            for (std::size_t c = 0; c < k; ++c) {
                const double p = (static_cast<double>(c) + 0.5) / static_cast<double>(k);
                const auto idx = static_cast<std::size_t>(p * static_cast<double>(sorted.size() - 1));
                state.means[c] = sorted[idx];
            }
        } else {
            // k distinct data points via a partial Fisher-Yates shuffle of indices.
            std::vector<std::size_t> idx(y.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t c = 0; c < k; ++c) {
                const std::size_t pick = c + rng.uniform_index(idx.size() - c);
                std::swap(idx[c], idx[pick]);
                state.means[c] = y[idx[c]];
            }
            std::sort(state.means.begin(), state.means.end());
        }
        if (run_em(y, state, variance_floor, options) &&
            (!any_ok || state.log_likelihood > best.log_likelihood)) {
            best = std::move(state);
            any_ok = true;
        }
    }
    if (!any_ok) {
        throw MixtureFitError(k, "EM failed for every restart");
    }
    NormalMixtureFit fit;
    fit.n_components = k;
    fit.means = std::move(best.means);
    fit.sds = std::move(best.sds);
    fit.weights = std::move(best.weights);
    fit.log_likelihood = best.log_likelihood;
    fit.bic = -2.0 * fit.log_likelihood + (3.0 * static_cast<double>(k) - 1.0) * std::log(n);
    return fit;
}

NormalMixtureFit normal_mixture_fit(std::span<const double> y, RngStream& rng, const NormalMixtureOptions& options) {
    if (options.k_max < 1 || y.size() < 2 * options.k_max) {
        throw std::invalid_argument("normal_mixture_fit: need n >= 2 k_max observations");
    }
    NormalMixtureFit best;
    for (std::size_t k = 1; k <= options.k_max; ++k) {
        NormalMixtureFit fit = normal_mixture_fit_k(y, k, rng, options);
        if (k == 1 || fit.bic < best.bic) {
            best = std::move(fit);
        }
    }
    return best;
}

double normal_mixture_tail(const NormalMixtureFit& fit, double k) {
    double total = 0.0;
    for (std::size_t c = 0; c < fit.n_components; ++c) {
        total += fit.weights[c] * normal_sf((k - fit.means[c]) / fit.sds[c]);
    }
    return std::clamp(total, 0.0, 1.0);
}

double relative_mse(double mse_edf, double mse_hat) {
    if (!(mse_edf > 0.0)) {
        throw std::domain_error("relative_mse: EDF mean squared error is zero");
    }
    return (mse_edf - mse_hat) / mse_edf * 100.0;
}

double relative_bias(std::span<const double> estimates, double p_true) {
    if (!(p_true > 0.0)) {
        throw std::domain_error("relative_bias: true probability is zero");
    }
    if (estimates.empty()) {
        throw std::invalid_argument("relative_bias: no estimates");
    }
    const double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / static_cast<double>(estimates.size());
    return (mean - p_true) / p_true * 100.0;
}

}  // namespace gsm
