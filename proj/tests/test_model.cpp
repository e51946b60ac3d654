#include "doctest.h"

#include <cmath>
#include <vector>

#include "gsm/model.hpp"
#include "support.hpp"

using namespace gsm;

namespace {

GsmParams random_params(RngStream& rng, std::size_t max_j) {
    const std::size_t j = 1 + rng.uniform_index(max_j);
    std::vector<double> conc(j, 0.8);
    return GsmParams(sample_dirichlet(conc, rng), 0.1 + 5.0 * rng.uniform());
}

}  // namespace

TEST_CASE("GsmParams validation") {
    CHECK_NOTHROW(GsmParams({0.25, 0.75}, 1.0));
    CHECK_THROWS_AS(GsmParams({0.5, 0.4}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GsmParams({1.2, -0.2}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GsmParams({1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GsmParams({1.0}, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(GsmParams({}, 1.0), std::invalid_argument);

    const GsmParams p({0.2, 0.3, 0.5}, 2.0);
    for (std::size_t j = 2; j <= 3; ++j) {
        CHECK(p.component_mean(j) > p.component_mean(j - 1));
        CHECK(p.component_variance(j) > p.component_variance(j - 1));
    }
}

TEST_CASE("density") {
    CHECK(density(GsmParams({1.0}, 1.0), 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(density(GsmParams({0.5, 0.5}, 1.0), 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(density(GsmParams({1.0}, 1.0), 0.0), std::domain_error);
    CHECK_THROWS_AS(log_density(GsmParams({1.0}, 1.0), -1.0), std::domain_error);

    // Large shapes would overflow Gamma(j) if evaluated naively.
    std::vector<double> w(200, 0.0);
    w[199] = 1.0;
    const GsmParams high(w, 1.0);
    CHECK(density(high, 200.0) ==
          doctest::Approx(static_cast<double>(testing::erlang_pdf(200, 1.0, 200.0))).epsilon(1e-10));
}

TEST_CASE("scale equivariance of the density") {
    RngStream rng(101);
    for (int rep = 0; rep < 50; ++rep) {
        const GsmParams p = random_params(rng, 30);
        const GsmParams unit(std::vector<double>(p.weights().begin(), p.weights().end()), 1.0);
        const double y = 0.05 + 20.0 * rng.uniform();
        const double direct = density(p, y);
        CHECK(std::fabs(direct - p.theta() * density(unit, p.theta() * y)) <= 1e-12 * direct);
    }
}

TEST_CASE("density integrates to one") {
    const GsmParams p({0.3, 0.0, 0.2, 0.0, 0.5}, 1.5);
    // Beyond y = 40 the shape-5 tail is below 1e-15.
    const double upper = 40.0;
    CHECK(tail_prob(p, upper) < 1e-12);
    // Near zero the j = 1 term is bounded, so Simpson on (tiny, upper) is accurate.
    const double area = testing::simpson([&](double y) { return density(p, y); }, 1e-12, upper, 20000);
    CHECK(std::fabs(area - 1.0) <= 1e-6);
}

TEST_CASE("cdf and tail_prob") {
    const GsmParams exp1({1.0}, 1.0);
    CHECK(cdf(exp1, 0.0) == 0.0);
    CHECK(tail_prob(exp1, 0.0) == 1.0);
    CHECK(cdf(exp1, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(tail_prob(exp1, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(cdf(exp1, -1.0), std::domain_error);
    CHECK_THROWS_AS(tail_prob(exp1, -1.0), std::domain_error);

    const GsmParams two({0.5, 0.5}, 1.0);
    const double e1 = std::exp(-1.0);
    CHECK(cdf(two, 1.0) == doctest::Approx(0.5 * (1 - e1) + 0.5 * (1 - 2 * e1)).epsilon(1e-13));
    CHECK(tail_prob(two, 1.0) == doctest::Approx(1.5 * e1).epsilon(1e-13));
    CHECK(std::fabs(tail_prob(two, 1.0) - 0.5518) < 5e-5);

    RngStream rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const GsmParams p = random_params(rng, 40);
        double previous = 0.0;
        for (double y = 0.0; y < 60.0; y += 0.37) {
            const double f = cdf(p, y);
            CHECK(std::fabs(f + tail_prob(p, y) - 1.0) <= 1e-12);
            CHECK(f >= previous - 1e-15);
            previous = f;

            // Oracle: weighted Erlang sums.
            long double sf = 0.0L;
            for (std::size_t j = 1; j <= p.n_components(); ++j) {
                sf += p.weights()[j - 1] * testing::erlang_sf(static_cast<int>(j), p.theta(), y);
            }
            CHECK(std::fabs(tail_prob(p, y) - static_cast<double>(sf)) <= 1e-10);
        }
    }
}

TEST_CASE("moments") {
    CHECK(moment(GsmParams({1.0}, 1.0), 1) == 1.0);
    const GsmParams p({0.5, 0.5}, 2.0);
    CHECK(moment(p, 1) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(moment(p, 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(model_mean(p) == moment(p, 1));

    const GsmParams g12({1.0}, 2.0);
    CHECK(model_mean(g12) == doctest::Approx(0.5));
    CHECK(model_variance(g12) == doctest::Approx(0.25));

    // Quadrature oracle for the first two moments.
    const double m1 = testing::simpson([&](double y) { return y * density(p, y); }, 1e-12, 40.0, 20000);
    const double m2 = testing::simpson([&](double y) { return y * y * density(p, y); }, 1e-12, 40.0, 20000);
    CHECK(m1 == doctest::Approx(0.75).epsilon(1e-8));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-8));

    // High orders go through log space; compare with the direct product.
    const GsmParams q({0.1, 0.2, 0.7}, 0.5);
    double direct = 0.0;
    for (int j = 1; j <= 3; ++j) {
        double rising = 1.0;
        for (int l = 0; l < 7; ++l) {
            rising *= j + l;
        }
        direct += q.weights()[j - 1] * rising / std::pow(0.5, 7);
    }
    CHECK(moment(q, 7) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("theta_from_mean") {
    const std::vector<double> one{1.0};
    CHECK(theta_from_mean(one, 1.0) == 1.0);
    const std::vector<double> second{0.0, 1.0};
    CHECK(theta_from_mean(second, 2.0) == 1.0);
    CHECK_THROWS_AS(theta_from_mean(one, 0.0), std::domain_error);

    RngStream rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        const GsmParams p = random_params(rng, 25);
        CHECK(theta_from_mean(p.weights(), model_mean(p)) == doctest::Approx(p.theta()).epsilon(1e-13));
    }
}

TEST_CASE("forward sampling") {
    RngStream rng(33);
    const GsmParams exp2({1.0}, 2.0);
    const Observations y = sample(exp2, 100000, rng);
    CHECK(y.min() > 0.0);
    CHECK(testing::ks_statistic(std::vector<double>(y.values().begin(), y.values().end()),
                                [](double x) { return 1.0 - std::exp(-2.0 * x); }) <
          testing::ks_critical_01(y.size()));

    // Empirical exceedance at the analytic 95th percentile.
    const GsmParams mix({0.6, 0.0, 0.3, 0.1}, 1.0);
    double lo = 0.0, hi = 100.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail_prob(mix, mid) > 0.05 ? lo : hi) = mid;
    }
    const Observations z = sample(mix, 100000, rng);
    double above = 0.0;
    for (double v : z.values()) {
        above += v > lo ? 1.0 : 0.0;
    }
    CHECK(std::fabs(above / z.size() - 0.05) < 3.0 * std::sqrt(0.05 * 0.95 / z.size()));
}

TEST_CASE("moment identity against forward samples") {
    RngStream rng(202);
    for (int rep = 0; rep < 20; ++rep) {
        const GsmParams p = random_params(rng, 20);
        const Observations y = sample(p, 200000, rng);
        for (unsigned m : {1u, 2u}) {
            std::vector<double> powers(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                powers[i] = std::pow(y[i], static_cast<double>(m));
            }
            const double se = std::sqrt(testing::variance(powers) / static_cast<double>(powers.size()));
            CHECK_MESSAGE(std::fabs(testing::mean(powers) - moment(p, m)) < 3.0 * se, "rep " << rep << " m " << m);
        }
    }
}
