#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gsm {

//! Counter-based random stream (Philox4x32-10).
//!
//! The 64-bit seed is the Philox key. The 128-bit counter is split into the
//! stream id (high half) and a block index (low half), so streams derived
//! from one seed never overlap within 2^64 blocks. Output is identical on
//! every platform for a given (seed, stream_id).
//!
//! Satisfies UniformRandomBitGenerator, but none of the distributions below
//! go through <random> so draw sequences stay bit-reproducible.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64();
    result_type operator()() { return next_u64(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    //! Uniform on [0, 1) with 53 random bits.
    double uniform();
    //! Uniform on (0, 1); safe to take the log of.
    double uniform_open();
    //! Standard normal (Marsaglia polar method).
    double normal();
    //! Uniform integer in [0, n), unbiased.
    std::uint64_t uniform_index(std::uint64_t n);

    //! Raw Philox4x32-10 block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                     std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::uint64_t buffer_[2] = {0, 0};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// Special functions. All throw std::domain_error outside their domain.

//! ln Gamma(x), Lanczos approximation (g = 7, 9 terms).
double log_gamma(double x);

//! ln of the rising factorial (a)_k = a (a+1) ... (a+k-1).
double log_pochhammer(double a, std::uint64_t k);

//! Lower and upper regularized incomplete gamma P(a, x), Q(a, x).
struct IncompleteGamma {
    double lower;
    double upper;
};
IncompleteGamma reg_incomplete_gamma(double a, double x);

//! CDF of Gamma(shape, rate) at x.
double reg_gamma_cdf(double shape, double rate, double x);
//! Survival function of Gamma(shape, rate) at x, computed without 1 - cdf cancellation.
double reg_gamma_sf(double shape, double rate, double x);

//! ln sum exp(v). -inf entries are allowed; throws if every entry is -inf.
double log_sum_exp(std::span<const double> values);

//! Standard normal CDF and survival function via erfc.
double normal_cdf(double z);
double normal_sf(double z);

// Variate generation. Gamma is always (shape, rate).

double sample_gamma(double shape, double rate, RngStream& rng);
//! ln of a Gamma(shape, 1) draw; stays finite for tiny shapes where the draw itself underflows.
double sample_log_gamma(double shape, RngStream& rng);
std::vector<double> sample_dirichlet(std::span<const double> concentration, RngStream& rng);
//! Dirichlet draw returned as log-weights (normalized so that log_sum_exp == 0).
std::vector<double> sample_log_dirichlet(std::span<const double> concentration, RngStream& rng);
//! Index in [0, size) drawn with probability proportional to exp(log_weights[j]).
std::size_t sample_categorical(std::span<const double> log_weights, RngStream& rng);
//! Same draw, but reuses \p log_weights as scratch (overwritten with unnormalized weights).
std::size_t sample_categorical_inplace(std::span<double> log_weights, RngStream& rng);

}  // namespace gsm
