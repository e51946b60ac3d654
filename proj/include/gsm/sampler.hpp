#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsm/model.hpp"
#include "gsm/numerics.hpp"
#include "gsm/observations.hpp"

namespace gsm {

//! Prior: theta ~ Gamma(alpha, beta), weights ~ Dirichlet(1/J, ..., 1/J).
//! alpha is integral so the collapsed label conditional only needs rising factorials.
struct Hyperparams {
    std::size_t n_components = 1;
    std::int64_t alpha = 1;
    double beta = 1.0;

    //! Throws std::invalid_argument when J < 1, alpha < 1 or beta <= 0.
    void validate() const;
};

//! Latent component labels. Labels are shapes, i.e. values in 1..J;
//! counts[j - 1] is the number of observations with label j.
struct LabelState {
    std::vector<std::size_t> labels;
    std::vector<std::size_t> counts;
    std::int64_t label_sum = 0;

    bool consistent() const;
    std::size_t occupied() const;
    void assign(std::size_t i, std::size_t new_label);
};

enum class Variant { collapsed, standard };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

struct ChainConfig {
    std::size_t iterations = 5000;
    std::size_t burn_in = 1000;
    Variant variant = Variant::collapsed;
    std::uint64_t seed = 1;
    std::size_t thin = 1;

    std::size_t retained() const;
    void validate() const;
};

//! Retained (weights, theta) draws. Weights are stored row-major, M x J.
class PosteriorDraws {
public:
    PosteriorDraws() = default;
    PosteriorDraws(std::size_t n_components, double sum_y);

    void push(std::span<const double> weights, double theta, std::size_t occupied);

    std::size_t size() const noexcept { return theta_.size(); }
    std::size_t n_components() const noexcept { return n_components_; }
    double sum_y() const noexcept { return sum_y_; }

    std::span<const double> weights(std::size_t m) const {
        return std::span<const double>(weights_).subspan(m * n_components_, n_components_);
    }
    std::span<const double> theta_draws() const noexcept { return theta_; }
    std::span<const std::size_t> occupied_counts() const noexcept { return occupied_; }

    //! Draw m as model parameters (weights renormalized against rounding drift).
    GsmParams params(std::size_t m) const;

    bool operator==(const PosteriorDraws&) const = default;

private:
    std::size_t n_components_ = 0;
    double sum_y_ = 0.0;
    std::vector<double> weights_;
    std::vector<double> theta_;
    std::vector<std::size_t> occupied_;
};

//! Thrown by run_chain when an iteration fails; carries the 0-based iteration.
class ChainError : public std::runtime_error {
public:
    ChainError(std::size_t iteration, const std::string& what);
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

//! Each observation starts at the component whose prior-mean location is
//! nearest: round((alpha / beta) * y_i), clamped to 1..J.
LabelState init_labels(const Observations& y, const Hyperparams& hyper);

//! Draw from Dirichlet(1/J + n_1, ..., 1/J + n_J).
std::vector<double> update_weights(const LabelState& state, const Hyperparams& hyper, RngStream& rng);

//! Draw from Gamma(alpha + S, beta + sum y).
double update_theta(const Observations& y, const LabelState& state, const Hyperparams& hyper, RngStream& rng);

//! Unnormalized log kappa_ij for j = 1..J with theta integrated out:
//!   ln pi_j + (j-1) ln y_i - ln Gamma(j) + ln (a)_j - j ln(rate_total),
//! where a = alpha + S_{-i} and rate_total = beta + sum y.
void collapsed_log_conditional(double y_i, std::span<const double> log_weights, double a, double rate_total,
                               std::span<double> out);

//! Unnormalized log pi_ij for j = 1..J given theta:
//!   ln pi_j + j ln theta + (j-1) ln y_i - theta y_i - ln Gamma(j).
void standard_log_conditional(double y_i, std::span<const double> log_weights, double theta, std::span<double> out);

//! Resample label i from the collapsed conditional; updates state and returns the new label.
std::size_t update_label_collapsed(std::size_t i, const Observations& y, LabelState& state,
                                   std::span<const double> weights, const Hyperparams& hyper, RngStream& rng);

//! Resample label i given theta; updates state and returns the new label.
std::size_t update_label_standard(std::size_t i, const Observations& y, LabelState& state,
                                  std::span<const double> weights, double theta, RngStream& rng);

//! Called once per retained iteration with the label state at that point.
using LabelObserver = std::function<void(std::size_t iteration, const LabelState& state)>;

//! Runs the Gibbs sampler and returns the retained draws.
//!
//! Collapsed iteration: weights, then a systematic label sweep with theta
//! integrated out, then theta drawn from its full conditional by composition.
//! Standard iteration: theta, weights, then the label sweep given theta.
PosteriorDraws run_chain(const Observations& y, const Hyperparams& hyper, const ChainConfig& config,
                         RngStream& rng, const LabelObserver& observer = {});

//! Convenience overload using RngStream(config.seed, 0).
PosteriorDraws run_chain(const Observations& y, const Hyperparams& hyper, const ChainConfig& config);

}  // namespace gsm
