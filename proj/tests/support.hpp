#pragma once

// Independent oracles shared by the test suites. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace gsm::testing {

//! Erlang survival P(X > x) for X ~ Gamma(shape, rate), integer shape, by the
//! finite Poisson sum e^{-rate x} sum_{i < shape} (rate x)^i / i!, in long double.
inline long double erlang_sf(int shape, double rate, double x) {
    const long double z = static_cast<long double>(rate) * x;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int i = 1; i < shape; ++i) {
        term *= z / i;
        sum += term;
    }
    return std::exp(-z) * sum;
}

inline long double erlang_cdf(int shape, double rate, double x) {
    return 1.0L - erlang_sf(shape, rate, x);
}

//! Direct Gamma(shape, rate) density for integer shape, long double.
inline long double erlang_pdf(int shape, double rate, double y) {
    return std::exp(static_cast<long double>(shape) * std::log(static_cast<long double>(rate)) +
                    (shape - 1) * std::log(static_cast<long double>(y)) - rate * static_cast<long double>(y) -
                    std::lgamma(static_cast<long double>(shape)));
}

//! Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

//! 1% critical value of the KS statistic for large n.
inline double ks_critical_01(std::size_t n) {
    return 1.628 / std::sqrt(static_cast<double>(n));
}

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return ss / static_cast<double>(v.size() - 1);
}

//! Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) {
        sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

}  // namespace gsm::testing

namespace gsm::testing {

//! Exact posterior over labels for tiny problems, by enumerating all J^n label
//! vectors. p(x) is Dirichlet-multinomial with concentrations 1/J; p(y | x) has
//! theta integrated against its Gamma(alpha, beta) prior.
struct EnumeratedPosterior {
    std::vector<std::vector<double>> label_marginals;  // [i][j - 1]
    double theta_mean = 0.0;
};

inline EnumeratedPosterior enumerate_posterior(const std::vector<double>& y, int J, long alpha, double beta) {
    const std::size_t n = y.size();
    long double sum_y = 0.0L;
    for (double v : y) {
        sum_y += v;
    }
    const long double a = 1.0L / J;
    std::size_t configs = 1;
    for (std::size_t i = 0; i < n; ++i) {
        configs *= static_cast<std::size_t>(J);
    }
    std::vector<long double> log_joint(configs);
    std::vector<std::vector<int>> labels(configs, std::vector<int>(n));
    for (std::size_t c = 0; c < configs; ++c) {
        std::size_t code = c;
        std::vector<int> counts(static_cast<std::size_t>(J), 0);
        long S = 0;
        long double lp = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            const int x = static_cast<int>(code % static_cast<std::size_t>(J)) + 1;
            code /= static_cast<std::size_t>(J);
            labels[c][i] = x;
            ++counts[static_cast<std::size_t>(x - 1)];
            S += x;
            lp += (x - 1) * std::log(static_cast<long double>(y[i])) - std::lgamma(static_cast<long double>(x));
        }
        for (int j = 0; j < J; ++j) {
            lp += std::lgamma(a + counts[static_cast<std::size_t>(j)]) - std::lgamma(a);
        }
        lp += std::lgamma(static_cast<long double>(alpha + S)) -
              (alpha + S) * std::log(static_cast<long double>(beta) + sum_y);
        log_joint[c] = lp;
    }
    long double top = log_joint[0];
    for (auto v : log_joint) {
        top = std::max(top, v);
    }
    long double z = 0.0L;
    for (auto& v : log_joint) {
        v = std::exp(v - top);
        z += v;
    }
    EnumeratedPosterior out;
    out.label_marginals.assign(n, std::vector<double>(static_cast<std::size_t>(J), 0.0));
    long double theta = 0.0L;
    for (std::size_t c = 0; c < configs; ++c) {
        const long double p = log_joint[c] / z;
        long S = 0;
        for (std::size_t i = 0; i < n; ++i) {
            out.label_marginals[i][static_cast<std::size_t>(labels[c][i] - 1)] += static_cast<double>(p);
            S += labels[c][i];
        }
        theta += p * (alpha + S) / (beta + sum_y);
    }
    out.theta_mean = static_cast<double>(theta);
    return out;
}

}  // namespace gsm::testing
