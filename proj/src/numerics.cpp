#include "gsm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gsm {

namespace {

constexpr double NEG_INF = -std::numeric_limits<double>::infinity();

constexpr std::uint32_t PHILOX_M0 = 0xD2511F53u;
constexpr std::uint32_t PHILOX_M1 = 0xCD9E8D57u;
constexpr std::uint32_t PHILOX_W0 = 0x9E3779B9u;
constexpr std::uint32_t PHILOX_W1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

[[noreturn]] void domain_fail(const char* fn, const std::string& what) {
    throw std::domain_error(std::string(fn) + ": " + what);
}

// Lanczos coefficients, g = 7, n = 9.
constexpr double LANCZOS_G = 7.0;
constexpr double LANCZOS_COEF[9] = {0.99999999999980993,     676.5203681218851,
                                    -1259.1392167224028,     771.32342877765313,
                                    -176.61502916214059,     12.507343278686905,
                                    -0.13857109526572012,    9.9843695780195716e-6,
                                    1.5056327351493116e-7};

constexpr double INC_GAMMA_EPS = 1e-16;
constexpr double INC_GAMMA_TINY = 1e-300;
constexpr int INC_GAMMA_MAX_ITER = 100000;

double gamma_series(double a, double x, double log_prefactor) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < INC_GAMMA_MAX_ITER; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * INC_GAMMA_EPS) {
            return sum * std::exp(log_prefactor);
        }
    }
    domain_fail("reg_incomplete_gamma", "series did not converge");
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_continued_fraction(double a, double x, double log_prefactor) {
    double b = x + 1.0 - a;
    double c = 1.0 / INC_GAMMA_TINY;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < INC_GAMMA_MAX_ITER; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < INC_GAMMA_TINY) {
            d = INC_GAMMA_TINY;
        }
        c = b + an / c;
        if (std::fabs(c) < INC_GAMMA_TINY) {
            c = INC_GAMMA_TINY;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < INC_GAMMA_EPS) {
            return std::exp(log_prefactor) * h;
        }
    }
    domain_fail("reg_incomplete_gamma", "continued fraction did not converge");
}

}  // namespace

//==========================================================================
// RngStream
//==========================================================================

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

std::array<std::uint32_t, 4> RngStream::philox_block(std::array<std::uint32_t, 4> ctr,
                                                     std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += PHILOX_W0;
            key[1] += PHILOX_W1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(PHILOX_M0, ctr[0], hi0, lo0);
        mulhilo(PHILOX_M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

void RngStream::refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox_block(ctr, key);
    ++block_;
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
}

std::uint64_t RngStream::next_u64() {
    if (buffered_ == 0) {
        refill();
    }
    return buffer_[2 - buffered_--];
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * m;
    has_spare_ = true;
    return u * m;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_index: empty range");
    }
    // Lemire's multiply-and-reject.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

//==========================================================================
// Special functions
//==========================================================================

double log_gamma(double x) {
    if (!std::isfinite(x) || x <= 0.0) {
        domain_fail("log_gamma", "argument must be positive and finite, got " + std::to_string(x));
    }
    if (x < 0.5) {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    double series = LANCZOS_COEF[0];
    for (int i = 1; i < 9; ++i) {
        series += LANCZOS_COEF[i] / (z + i);
    }
    const double t = z + LANCZOS_G + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

double log_pochhammer(double a, std::uint64_t k) {
    if (!std::isfinite(a) || a <= 0.0) {
        domain_fail("log_pochhammer", "base must be positive and finite");
    }
    if (k <= 256) {
        double sum = 0.0;
        for (std::uint64_t l = 0; l < k; ++l) {
            sum += std::log(a + static_cast<double>(l));
        }
        return sum;
    }
    return log_gamma(a + static_cast<double>(k)) - log_gamma(a);
}

IncompleteGamma reg_incomplete_gamma(double a, double x) {
    if (!std::isfinite(a) || a <= 0.0) {
        domain_fail("reg_incomplete_gamma", "shape must be positive and finite");
    }
    if (std::isnan(x) || x < 0.0) {
        domain_fail("reg_incomplete_gamma", "x must be nonnegative");
    }
    if (x == 0.0) {
        return {0.0, 1.0};
    }
    if (std::isinf(x)) {
        return {1.0, 0.0};
    }
    const double log_prefactor = -x + a * std::log(x) - log_gamma(a);
    if (x < a + 1.0) {
        const double p = std::min(1.0, gamma_series(a, x, log_prefactor));
        return {p, 1.0 - p};
    }
    const double q = std::min(1.0, gamma_continued_fraction(a, x, log_prefactor));
    return {1.0 - q, q};
}

double reg_gamma_cdf(double shape, double rate, double x) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        domain_fail("reg_gamma_cdf", "rate must be positive and finite");
    }
    if (std::isnan(x) || x < 0.0) {
        domain_fail("reg_gamma_cdf", "x must be nonnegative");
    }
    return reg_incomplete_gamma(shape, rate * x).lower;
}

double reg_gamma_sf(double shape, double rate, double x) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        domain_fail("reg_gamma_sf", "rate must be positive and finite");
    }
    if (std::isnan(x) || x < 0.0) {
        domain_fail("reg_gamma_sf", "x must be nonnegative");
    }
    return reg_incomplete_gamma(shape, rate * x).upper;
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("log_sum_exp: empty input");
    }
    const double top = *std::max_element(values.begin(), values.end());
    if (top == NEG_INF) {
        throw std::domain_error("log_sum_exp: all entries are -inf");
    }
    if (std::isnan(top) || std::isinf(top)) {
        return top;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += std::exp(v - top);
    }
    return top + std::log(sum);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

//==========================================================================
// Variates
//==========================================================================

namespace {

// Marsaglia-Tsang for shape >= 1, unit rate.
double marsaglia_tsang(double shape, RngStream& rng) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

void check_gamma_params(const char* fn, double shape, double rate) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        domain_fail(fn, "shape must be positive and finite");
    }
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        domain_fail(fn, "rate must be positive and finite");
    }
}

}  // namespace

double sample_gamma(double shape, double rate, RngStream& rng) {
    check_gamma_params("sample_gamma", shape, rate);
    if (shape >= 1.0) {
        return marsaglia_tsang(shape, rng) / rate;
    }
    const double boosted = marsaglia_tsang(shape + 1.0, rng);
    const double draw = boosted * std::pow(rng.uniform_open(), 1.0 / shape) / rate;
    // Underflow to zero is possible for tiny shapes; keep the support open.
    return draw > 0.0 ? draw : std::numeric_limits<double>::denorm_min();
}

double sample_log_gamma(double shape, RngStream& rng) {
    check_gamma_params("sample_log_gamma", shape, 1.0);
    if (shape >= 1.0) {
        return std::log(marsaglia_tsang(shape, rng));
    }
    const double boosted = marsaglia_tsang(shape + 1.0, rng);
    return std::log(boosted) + std::log(rng.uniform_open()) / shape;
}

std::vector<double> sample_log_dirichlet(std::span<const double> concentration, RngStream& rng) {
    if (concentration.empty()) {
        throw std::invalid_argument("sample_dirichlet: empty concentration");
    }
    std::vector<double> out(concentration.size());
    for (std::size_t j = 0; j < concentration.size(); ++j) {
        if (!(concentration[j] > 0.0) || !std::isfinite(concentration[j])) {
            domain_fail("sample_dirichlet", "concentrations must be positive");
        }
        out[j] = sample_log_gamma(concentration[j], rng);
    }
    const double norm = log_sum_exp(out);
    for (double& v : out) {
        v -= norm;
    }
    return out;
}

std::vector<double> sample_dirichlet(std::span<const double> concentration, RngStream& rng) {
    std::vector<double> out = sample_log_dirichlet(concentration, rng);
    double sum = 0.0;
    for (double& v : out) {
        v = std::exp(v);
        sum += v;
    }
    for (double& v : out) {
        v /= sum;
    }
    return out;
}

std::size_t sample_categorical_inplace(std::span<double> log_weights, RngStream& rng) {
    if (log_weights.empty()) {
        throw std::invalid_argument("sample_categorical: empty weights");
    }
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    if (top == NEG_INF || std::isnan(top)) {
        throw std::domain_error("sample_categorical: no finite weight");
    }
    double total = 0.0;
    for (double& w : log_weights) {
        w = std::exp(w - top);
        total += w;
    }
    const double target = rng.uniform() * total;
    double running = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t j = 0; j < log_weights.size(); ++j) {
        if (log_weights[j] > 0.0) {
            running += log_weights[j];
            last_positive = j;
            if (target < running) {
                return j;
            }
        }
    }
    // Rounding left target at or beyond the accumulated total.
    return last_positive;
}

std::size_t sample_categorical(std::span<const double> log_weights, RngStream& rng) {
    std::vector<double> scratch(log_weights.begin(), log_weights.end());
    return sample_categorical_inplace(scratch, rng);
}

}  // namespace gsm
