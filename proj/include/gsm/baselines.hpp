#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "gsm/numerics.hpp"

namespace gsm {

//! Proportion of values strictly greater than k.
double edf_tail(std::span<const double> y, double k);

struct LogNormalFit {
    double mu_hat;
    double sigma_hat;  // MLE, divisor n
};

//! Throws std::invalid_argument on nonpositive values, std::domain_error when all values are equal.
LogNormalFit lognormal_fit(std::span<const double> y);
//! 1 - Phi((ln k - mu) / sigma) for k > 0; 1 for k <= 0.
double lognormal_tail(const LogNormalFit& fit, double k);

struct NormalMixtureFit {
    std::size_t n_components = 0;
    std::vector<double> means;
    std::vector<double> sds;
    std::vector<double> weights;
    double log_likelihood = 0.0;
    double bic = 0.0;
};

struct NormalMixtureOptions {
    std::size_t k_max = 9;
    std::size_t restarts = 5;
    std::size_t max_iterations = 500;
    double tolerance = 1e-8;
};

//! Thrown when every EM restart fails for some component count.
class MixtureFitError : public std::runtime_error {
public:
    MixtureFitError(std::size_t n_components, const std::string& what);
    std::size_t n_components() const noexcept { return n_components_; }

private:
    std::size_t n_components_;
};

//! Univariate unequal-variance Gaussian mixture by EM, one fit per K in 1..k_max,
//! keeping the best of `restarts` initializations (the first from data quantiles,
//! the rest from random data points). Returns the K with the smallest
//! BIC = -2 loglik + (3K - 1) ln n. Requires n >= 2 k_max.
NormalMixtureFit normal_mixture_fit(std::span<const double> y, RngStream& rng,
                                    const NormalMixtureOptions& options = {});
//! EM for a single K; exposed for tests.
NormalMixtureFit normal_mixture_fit_k(std::span<const double> y, std::size_t k, RngStream& rng,
                                      const NormalMixtureOptions& options = {});
double normal_mixture_tail(const NormalMixtureFit& fit, double k);

//! (mse_edf - mse_hat) / mse_edf * 100; positive when the estimator beats the EDF.
double relative_mse(double mse_edf, double mse_hat);
//! (mean(estimates) - p_true) / p_true * 100.
double relative_bias(std::span<const double> estimates, double p_true);

}  // namespace gsm
