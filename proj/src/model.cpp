#include "gsm/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gsm {

GsmParams::GsmParams(std::vector<double> weights, double theta) : weights_(std::move(weights)), theta_(theta) {
    if (weights_.empty()) {
        throw std::invalid_argument("GsmParams: need at least one component");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("GsmParams: weights must be nonnegative");
        }
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-10) {
        throw std::invalid_argument("GsmParams: weights sum to " + std::to_string(total) + ", not 1");
    }
    if (!std::isfinite(theta_) || theta_ <= 0.0) {
        throw std::invalid_argument("GsmParams: theta must be positive and finite");
    }
}

double log_density(const GsmParams& params, double y) {
    if (std::isnan(y) || y <= 0.0) {
        throw std::domain_error("density: y must be strictly positive");
    }
    const double log_theta = std::log(params.theta());
    const double log_y = std::log(y);
    const auto weights = params.weights();
    std::vector<double> terms;
    terms.reserve(weights.size());
    for (std::size_t j = 1; j <= weights.size(); ++j) {
        const double w = weights[j - 1];
        if (w <= 0.0) {
            continue;
        }
        const double shape = static_cast<double>(j);
        terms.push_back(std::log(w) + shape * log_theta + (shape - 1.0) * log_y - params.theta() * y -
                        log_gamma(shape));
    }
    return log_sum_exp(terms);
}

double density(const GsmParams& params, double y) {
    return std::exp(log_density(params, y));
}

double cdf(const GsmParams& params, double y) {
    if (std::isnan(y) || y < 0.0) {
        throw std::domain_error("cdf: y must be nonnegative");
    }
    const auto weights = params.weights();
    double total = 0.0;
    for (std::size_t j = 1; j <= weights.size(); ++j) {
        if (weights[j - 1] > 0.0) {
            total += weights[j - 1] * reg_gamma_cdf(static_cast<double>(j), params.theta(), y);
        }
    }
    return std::min(total, 1.0);
}

double tail_prob(const GsmParams& params, double k) {
    if (std::isnan(k) || k < 0.0) {
        throw std::domain_error("tail_prob: threshold must be nonnegative");
    }
    if (k == 0.0) {
        // Weights need not sum to 1 to the last ulp; the whole support lies above 0.
        return 1.0;
    }
    const auto weights = params.weights();
    double total = 0.0;
    for (std::size_t j = 1; j <= weights.size(); ++j) {
        if (weights[j - 1] > 0.0) {
            total += weights[j - 1] * reg_gamma_sf(static_cast<double>(j), params.theta(), k);
        }
    }
    return std::min(total, 1.0);
}

double moment(const GsmParams& params, unsigned m) {
    if (m == 0) {
        throw std::domain_error("moment: order must be positive");
    }
    const auto weights = params.weights();
    double total = 0.0;
    if (m <= 4) {
        for (std::size_t j = 1; j <= weights.size(); ++j) {
            double rising = 1.0;
            for (unsigned l = 0; l < m; ++l) {
                rising *= static_cast<double>(j + l);
            }
            total += weights[j - 1] * rising;
        }
        return total / std::pow(params.theta(), static_cast<double>(m));
    }
    const double log_scale = static_cast<double>(m) * std::log(params.theta());
    for (std::size_t j = 1; j <= weights.size(); ++j) {
        if (weights[j - 1] > 0.0) {
            total += weights[j - 1] * std::exp(log_pochhammer(static_cast<double>(j), m) - log_scale);
        }
    }
    return total;
}

double model_mean(const GsmParams& params) {
    return moment(params, 1);
}

double model_variance(const GsmParams& params) {
    const double mean = model_mean(params);
    return moment(params, 2) - mean * mean;
}

double theta_from_mean(std::span<const double> weights, double mu) {
    if (std::isnan(mu) || mu <= 0.0) {
        throw std::domain_error("theta_from_mean: mean must be positive");
    }
    double average_shape = 0.0;
    for (std::size_t j = 1; j <= weights.size(); ++j) {
        average_shape += weights[j - 1] * static_cast<double>(j);
    }
    return average_shape / mu;
}

Observations sample(const GsmParams& params, std::size_t n, RngStream& rng) {
    if (n == 0) {
        throw std::invalid_argument("sample: n must be positive");
    }
    std::vector<double> log_weights(params.n_components());
    for (std::size_t j = 0; j < log_weights.size(); ++j) {
        const double w = params.weights()[j];
        log_weights[j] = w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity();
    }
    std::vector<double> out(n);
    for (auto& v : out) {
        const std::size_t shape = sample_categorical(log_weights, rng) + 1;
        v = sample_gamma(static_cast<double>(shape), params.theta(), rng);
    }
    return Observations(std::move(out));
}

}  // namespace gsm
