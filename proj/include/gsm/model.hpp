#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gsm/numerics.hpp"
#include "gsm/observations.hpp"

namespace gsm {

//! Parameters of a gamma shape mixture: component j (1-based) is Gamma(j, theta),
//! so component means j/theta and variances j/theta^2 increase with j and the
//! labelling is fixed.
class GsmParams {
public:
    //! Throws std::invalid_argument unless weights form a simplex (tolerance 1e-10)
    //! and theta is positive and finite.
    GsmParams(std::vector<double> weights, double theta);

    std::span<const double> weights() const noexcept { return weights_; }
    double theta() const noexcept { return theta_; }
    std::size_t n_components() const noexcept { return weights_.size(); }

    double component_mean(std::size_t shape) const { return static_cast<double>(shape) / theta_; }
    double component_variance(std::size_t shape) const {
        return static_cast<double>(shape) / (theta_ * theta_);
    }

private:
    std::vector<double> weights_;
    double theta_;
};

double log_density(const GsmParams& params, double y);
double density(const GsmParams& params, double y);
double cdf(const GsmParams& params, double y);
//! P(Y > k) = sum_j pi_j (1 - F_j(k | theta)).
double tail_prob(const GsmParams& params, double k);

//! m-th raw moment: sum_j pi_j (j)(j+1)...(j+m-1) / theta^m.
double moment(const GsmParams& params, unsigned m);
double model_mean(const GsmParams& params);
double model_variance(const GsmParams& params);

//! Rate that gives mixture mean mu for the given weights.
double theta_from_mean(std::span<const double> weights, double mu);

//! n iid draws via the label-then-gamma representation.
Observations sample(const GsmParams& params, std::size_t n, RngStream& rng);

}  // namespace gsm
