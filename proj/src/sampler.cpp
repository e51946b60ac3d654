#include "gsm/sampler.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace gsm {

namespace {

constexpr double NEG_INF = -std::numeric_limits<double>::infinity();

// ln(alpha + t) tables above this size fall back to computing logs directly.
constexpr std::size_t MAX_LOG_TABLE = std::size_t{1} << 22;

std::vector<double> log_or_neg_inf(std::span<const double> weights) {
    std::vector<double> out(weights.size());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        out[j] = weights[j] > 0.0 ? std::log(weights[j]) : NEG_INF;
    }
    return out;
}

// out[j-1] = lw[j-1] + (j-1) ln y - ln Gamma(j) + ln (a)_j - j ln B, accumulated
// over j so that each step only adds ln y - ln(j-1) + ln(a+j-1) - ln B.
template <typename LogShift>
void collapsed_kernel(double log_y, std::span<const double> log_weights, double log_rate, LogShift&& ln_a_plus,
                      std::span<double> out) {
    double acc = ln_a_plus(0) - log_rate;
    out[0] = log_weights[0] + acc;
    for (std::size_t j = 2; j <= log_weights.size(); ++j) {
        acc += log_y - std::log(static_cast<double>(j - 1)) + ln_a_plus(j - 1) - log_rate;
        out[j - 1] = log_weights[j - 1] + acc;
    }
}

}  // namespace

//==========================================================================
// Types
//==========================================================================

void Hyperparams::validate() const {
    if (n_components < 1) {
        throw std::invalid_argument("Hyperparams: J must be at least 1");
    }
    if (alpha < 1) {
        throw std::invalid_argument("Hyperparams: alpha must be a positive integer");
    }
    if (!std::isfinite(beta) || beta <= 0.0) {
        throw std::invalid_argument("Hyperparams: beta must be positive and finite");
    }
}

bool LabelState::consistent() const {
    std::vector<std::size_t> recount(counts.size(), 0);
    std::int64_t sum = 0;
    for (std::size_t label : labels) {
        if (label < 1 || label > counts.size()) {
            return false;
        }
        ++recount[label - 1];
        sum += static_cast<std::int64_t>(label);
    }
    return recount == counts && sum == label_sum;
}

std::size_t LabelState::occupied() const {
    return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

void LabelState::assign(std::size_t i, std::size_t new_label) {
    const std::size_t old_label = labels[i];
    --counts[old_label - 1];
    ++counts[new_label - 1];
    label_sum += static_cast<std::int64_t>(new_label) - static_cast<std::int64_t>(old_label);
    labels[i] = new_label;
}

std::string_view to_string(Variant v) {
    return v == Variant::collapsed ? "collapsed" : "standard";
}

Variant parse_variant(std::string_view name) {
    if (name == "collapsed") {
        return Variant::collapsed;
    }
    if (name == "standard") {
        return Variant::standard;
    }
    throw std::invalid_argument("unknown sampler variant '" + std::string(name) + "'");
}

std::size_t ChainConfig::retained() const {
    return iterations > burn_in ? (iterations - burn_in) / thin : 0;
}

void ChainConfig::validate() const {
    if (iterations < 1) {
        throw std::invalid_argument("ChainConfig: iterations must be positive");
    }
    if (burn_in >= iterations) {
        throw std::invalid_argument("ChainConfig: burn_in must be smaller than iterations");
    }
    if (thin < 1) {
        throw std::invalid_argument("ChainConfig: thin must be positive");
    }
    if (retained() < 1) {
        throw std::invalid_argument("ChainConfig: no draws would be retained");
    }
}

PosteriorDraws::PosteriorDraws(std::size_t n_components, double sum_y) : n_components_(n_components), sum_y_(sum_y) {}

void PosteriorDraws::push(std::span<const double> weights, double theta, std::size_t occupied) {
    if (weights.size() != n_components_) {
        throw std::invalid_argument("PosteriorDraws: weight row has wrong length");
    }
    weights_.insert(weights_.end(), weights.begin(), weights.end());
    theta_.push_back(theta);
    occupied_.push_back(occupied);
}

GsmParams PosteriorDraws::params(std::size_t m) const {
    const auto row = weights(m);
    std::vector<double> w(row.begin(), row.end());
    double total = 0.0;
    for (double v : w) {
        total += v;
    }
    for (double& v : w) {
        v /= total;
    }
    return GsmParams(std::move(w), theta_.at(m));
}

ChainError::ChainError(std::size_t iteration, const std::string& what)
    : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

//==========================================================================
// Single updates
//==========================================================================

LabelState init_labels(const Observations& y, const Hyperparams& hyper) {
    hyper.validate();
    const double prior_mean = static_cast<double>(hyper.alpha) / hyper.beta;
    const auto J = static_cast<double>(hyper.n_components);
    LabelState state;
    state.labels.resize(y.size());
    state.counts.assign(hyper.n_components, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double location = std::clamp(std::round(prior_mean * y[i]), 1.0, J);
        const auto label = static_cast<std::size_t>(location);
        state.labels[i] = label;
        ++state.counts[label - 1];
        state.label_sum += static_cast<std::int64_t>(label);
    }
    return state;
}

namespace {

std::vector<double> log_weights_draw(const LabelState& state, const Hyperparams& hyper, RngStream& rng) {
    const double prior = 1.0 / static_cast<double>(hyper.n_components);
    std::vector<double> concentration(hyper.n_components);
    for (std::size_t j = 0; j < concentration.size(); ++j) {
        concentration[j] = prior + static_cast<double>(state.counts[j]);
    }
    return sample_log_dirichlet(concentration, rng);
}

std::vector<double> exp_normalized(std::span<const double> log_weights) {
    std::vector<double> out(log_weights.size());
    double total = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = std::exp(log_weights[j]);
        total += out[j];
    }
    for (double& v : out) {
        v /= total;
    }
    return out;
}

}  // namespace

std::vector<double> update_weights(const LabelState& state, const Hyperparams& hyper, RngStream& rng) {
    return exp_normalized(log_weights_draw(state, hyper, rng));
}

double update_theta(const Observations& y, const LabelState& state, const Hyperparams& hyper, RngStream& rng) {
    const double shape = static_cast<double>(hyper.alpha + state.label_sum);
    const double rate = hyper.beta + (y.empty() ? 0.0 : y.sum());
    return sample_gamma(shape, rate, rng);
}

void collapsed_log_conditional(double y_i, std::span<const double> log_weights, double a, double rate_total,
                               std::span<double> out) {
    if (!(y_i > 0.0) || !(a > 0.0) || !(rate_total > 0.0) || out.size() != log_weights.size() ||
        log_weights.empty()) {
        throw std::domain_error("collapsed_log_conditional: invalid arguments");
    }
    collapsed_kernel(std::log(y_i), log_weights, std::log(rate_total),
                     [a](std::size_t l) { return std::log(a + static_cast<double>(l)); }, out);
}

void standard_log_conditional(double y_i, std::span<const double> log_weights, double theta, std::span<double> out) {
    if (!(y_i > 0.0) || !(theta > 0.0) || out.size() != log_weights.size() || log_weights.empty()) {
        throw std::domain_error("standard_log_conditional: invalid arguments");
    }
    const double log_y = std::log(y_i);
    const double log_theta = std::log(theta);
    double log_gamma_j = 0.0;
    for (std::size_t j = 1; j <= log_weights.size(); ++j) {
        if (j > 1) {
            log_gamma_j += std::log(static_cast<double>(j - 1));
        }
        const double shape = static_cast<double>(j);
        out[j - 1] = log_weights[j - 1] + shape * log_theta + (shape - 1.0) * log_y - theta * y_i - log_gamma_j;
    }
}

std::size_t update_label_collapsed(std::size_t i, const Observations& y, LabelState& state,
                                   std::span<const double> weights, const Hyperparams& hyper, RngStream& rng) {
    assert(state.consistent());
    const auto log_weights = log_or_neg_inf(weights);
    std::vector<double> scratch(weights.size());
    const double a = static_cast<double>(hyper.alpha + state.label_sum - static_cast<std::int64_t>(state.labels[i]));
    collapsed_log_conditional(y[i], log_weights, a, hyper.beta + y.sum(), scratch);
    const std::size_t label = sample_categorical_inplace(scratch, rng) + 1;
    state.assign(i, label);
    return label;
}

std::size_t update_label_standard(std::size_t i, const Observations& y, LabelState& state,
                                  std::span<const double> weights, double theta, RngStream& rng) {
    const auto log_weights = log_or_neg_inf(weights);
    std::vector<double> scratch(weights.size());
    standard_log_conditional(y[i], log_weights, theta, scratch);
    const std::size_t label = sample_categorical_inplace(scratch, rng) + 1;
    state.assign(i, label);
    return label;
}

//==========================================================================
// Chain
//==========================================================================

namespace {

// Per-chain caches for the sweep: ln y_i, ln Gamma(j), and ln(alpha + t) for
// every reachable integer offset t = S_{-i} + l.
class SweepWorkspace {
public:
    SweepWorkspace(const Observations& y, const Hyperparams& hyper)
        : log_y_(y.size()), log_gamma_(hyper.n_components), scratch_(hyper.n_components) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            log_y_[i] = std::log(y[i]);
        }
        log_int_.resize(hyper.n_components);
        for (std::size_t j = 2; j <= hyper.n_components; ++j) {
            log_int_[j - 1] = std::log(static_cast<double>(j - 1));
            log_gamma_[j - 1] = log_gamma_[j - 2] + log_int_[j - 1];
        }
        const std::size_t span = y.size() * hyper.n_components + hyper.n_components;
        if (span <= MAX_LOG_TABLE) {
            log_alpha_plus_.resize(span);
            for (std::size_t t = 0; t < span; ++t) {
                log_alpha_plus_[t] = std::log(static_cast<double>(hyper.alpha) + static_cast<double>(t));
            }
        }
    }

    void collapsed(std::size_t i, std::span<const double> log_weights, std::int64_t alpha, std::int64_t s_minus_i,
                   double log_rate) {
        const double log_y = log_y_[i];
        const auto offset = static_cast<std::size_t>(s_minus_i);
        if (!log_alpha_plus_.empty()) {
            const double* table = log_alpha_plus_.data() + offset;
            double acc = table[0] - log_rate;
            scratch_[0] = log_weights[0] + acc;
            const double step = log_y - log_rate;
            for (std::size_t j = 1; j < scratch_.size(); ++j) {
                acc += step + table[j] - log_int_[j];
                scratch_[j] = log_weights[j] + acc;
            }
        } else {
            const double a = static_cast<double>(alpha + s_minus_i);
            collapsed_kernel(log_y, log_weights, log_rate,
                             [a](std::size_t l) { return std::log(a + static_cast<double>(l)); }, scratch_);
        }
    }

    void standard(std::size_t i, double y_i, std::span<const double> log_weights, double log_theta, double theta) {
        const double log_y = log_y_[i];
        const double base = -theta * y_i;
        for (std::size_t j = 1; j <= scratch_.size(); ++j) {
            const double shape = static_cast<double>(j);
            scratch_[j - 1] =
                log_weights[j - 1] + shape * log_theta + (shape - 1.0) * log_y + base - log_gamma_[j - 1];
        }
    }

    std::span<double> scratch() { return scratch_; }

private:
    std::vector<double> log_y_;
    std::vector<double> log_gamma_;
    std::vector<double> log_int_;  // log_int_[j] = ln j, j >= 1
    std::vector<double> log_alpha_plus_;
    std::vector<double> scratch_;
};

}  // namespace

PosteriorDraws run_chain(const Observations& y, const Hyperparams& hyper, const ChainConfig& config,
                         RngStream& rng, const LabelObserver& observer) {
    hyper.validate();
    config.validate();
    if (y.empty()) {
        throw std::invalid_argument("run_chain: no observations");
    }

    LabelState state = init_labels(y, hyper);
    SweepWorkspace workspace(y, hyper);
    PosteriorDraws draws(hyper.n_components, y.sum());

    const double rate_total = hyper.beta + y.sum();
    const double log_rate = std::log(rate_total);
    std::vector<double> log_weights;
    double theta = static_cast<double>(hyper.alpha) / hyper.beta;

    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        try {
            if (config.variant == Variant::collapsed) {
                log_weights = log_weights_draw(state, hyper, rng);
                for (std::size_t i = 0; i < y.size(); ++i) {
                    const std::int64_t s_minus_i = state.label_sum - static_cast<std::int64_t>(state.labels[i]);
                    workspace.collapsed(i, log_weights, hyper.alpha, s_minus_i, log_rate);
                    state.assign(i, sample_categorical_inplace(workspace.scratch(), rng) + 1);
                }
                theta = update_theta(y, state, hyper, rng);
            } else {
                theta = update_theta(y, state, hyper, rng);
                log_weights = log_weights_draw(state, hyper, rng);
                const double log_theta = std::log(theta);
                for (std::size_t i = 0; i < y.size(); ++i) {
                    workspace.standard(i, y[i], log_weights, log_theta, theta);
                    state.assign(i, sample_categorical_inplace(workspace.scratch(), rng) + 1);
                }
            }
        } catch (const std::exception& e) {
            throw ChainError(iter, e.what());
        }
        assert(state.consistent());

        if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0 &&
            draws.size() < config.retained()) {
            draws.push(exp_normalized(log_weights), theta, state.occupied());
            if (observer) {
                observer(iter, state);
            }
        }
    }
    return draws;
}

PosteriorDraws run_chain(const Observations& y, const Hyperparams& hyper, const ChainConfig& config) {
    RngStream rng(config.seed, 0);
    return run_chain(y, hyper, config, rng);
}

}  // namespace gsm
