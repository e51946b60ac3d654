#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsm/calibrate.hpp"
#include "gsm/inference.hpp"
#include "support.hpp"

using namespace gsm;

TEST_CASE("suggest_theta_tilde") {
    const auto a = suggest_theta_tilde(Observations({3.0, 10.0, 7.0}), 20);
    CHECK(a.theta_tilde == 2.0);
    CHECK(suggest_theta_tilde(Observations({1.0, 10.0}), 20).spans_range);
    CHECK_FALSE(suggest_theta_tilde(Observations({0.01, 10.0}), 20).spans_range);
    // Boundary: 1/theta_tilde == min(y) counts as spanning.
    CHECK(suggest_theta_tilde(Observations({0.5, 10.0}), 20).spans_range);
}

TEST_CASE("calibrate arithmetic") {
    const Calibration c = calibrate(Observations({1.0, 2.0, 3.0}), CalibrationInput{0.25, 6});
    CHECK(c.theta_tilde == 2.0);
    CHECK(c.hyper.beta == 2.0);
    CHECK(c.hyper.alpha == 4);
    CHECK(c.hyper.n_components == 6);

    const Observations y({0.7, 1.9, 4.4, 12.5});
    const Calibration half = calibrate(y, CalibrationInput{0.5, 30});
    CHECK(half.hyper.beta == y.sum());

    // Rounding is half away from zero: theta_tilde * beta = 2.5 -> 3.
    const Calibration rounding = calibrate(Observations({1.0, 4.0}), CalibrationInput{0.5, 2});
    REQUIRE(rounding.theta_tilde * rounding.hyper.beta == 2.5);
    CHECK(rounding.hyper.alpha == 3);

    // alpha never drops below one.
    const Calibration tiny = calibrate(Observations({100.0, 200.0}), CalibrationInput{0.01, 1});
    CHECK(tiny.hyper.alpha == 1);

    CHECK_THROWS_AS(calibrate(y, CalibrationInput{0.0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(calibrate(y, CalibrationInput{1.0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(calibrate(y, CalibrationInput{0.3, 0}), std::invalid_argument);
}

TEST_CASE("calibrate warnings") {
    const Calibration bad = calibrate(Observations({0.01, 10.0}), CalibrationInput{0.3, 20});
    CHECK_FALSE(bad.spans_range);
    CHECK_FALSE(bad.warnings.empty());
    const Calibration good = calibrate(Observations({1.0, 10.0}), CalibrationInput{0.3, 20});
    CHECK(good.spans_range);
    CHECK(good.warnings.empty());
    const Calibration outside_band = calibrate(Observations({1.0, 10.0}), CalibrationInput{0.8, 20});
    CHECK_FALSE(outside_band.warnings.empty());
}

TEST_CASE("calibrate properties") {
    RngStream rng(41);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> v(5 + rng.uniform_index(30));
        for (auto& x : v) {
            x = 0.01 + 100.0 * rng.uniform();
        }
        const Observations y(v);
        const double omega = 0.05 + 0.9 * rng.uniform();
        const std::size_t J = 1 + rng.uniform_index(200);
        const Calibration c = calibrate(y, CalibrationInput{omega, J});
        CHECK(c.hyper.alpha >= 1);
        // Prior weight recovered from beta.
        CHECK(c.hyper.beta / (c.hyper.beta + y.sum()) == doctest::Approx(omega).epsilon(1e-12));
        CHECK(c.spans_range == (1.0 / c.theta_tilde <= y.min()));

        // Scaling y by s scales beta by s and leaves theta_tilde * beta unchanged.
        const double s = 0.1 + 10.0 * rng.uniform();
        std::vector<double> scaled(v);
        for (auto& x : scaled) {
            x *= s;
        }
        const Calibration cs = calibrate(Observations(scaled), CalibrationInput{omega, J});
        CHECK(cs.hyper.beta == doctest::Approx(s * c.hyper.beta).epsilon(1e-12));
        CHECK(cs.theta_tilde * cs.hyper.beta == doctest::Approx(c.theta_tilde * c.hyper.beta).epsilon(1e-12));
        CHECK(std::abs(cs.hyper.alpha - c.hyper.alpha) <= 1);
    }
}

TEST_CASE("diagnose_fit") {
    SUBCASE("moments per draw and sample statistics") {
        const Observations y({1.0, 2.0, 4.0});
        PosteriorDraws draws(2, y.sum());
        draws.push(std::vector<double>{0.5, 0.5}, 2.0, 2);
        draws.push(std::vector<double>{1.0, 0.0}, 1.0, 1);
        const DiagnosticReport r = diagnose_fit(draws, y);
        REQUIRE(r.mean_draws.size() == 2);
        CHECK(r.mean_draws[0] == model_mean(GsmParams({0.5, 0.5}, 2.0)));
        CHECK(r.mean_draws[1] == 1.0);
        CHECK(r.var_draws[1] == doctest::Approx(1.0));
        CHECK(r.sample_mean == doctest::Approx(7.0 / 3.0));
        CHECK(r.sample_var == doctest::Approx(testing::variance({1.0, 2.0, 4.0})));
        CHECK(r.occupied_hist.at(1) == 0.5);
        CHECK(r.occupied_hist.at(2) == 0.5);
        CHECK_THROWS_AS(diagnose_fit(PosteriorDraws(2, 1.0), y), std::invalid_argument);
    }

    SUBCASE("a well-specified fit raises no flags") {
        RngStream rng(42);
        const GsmParams truth({0.4, 0.0, 0.3, 0.0, 0.0, 0.3}, 1.0);
        const Observations y = sample(truth, 300, rng);
        const Calibration cal = calibrate(y, CalibrationInput{0.3, 30});
        ChainConfig config;
        config.iterations = 3000;
        config.burn_in = 1000;
        config.seed = 8;
        const DiagnosticReport r = diagnose_fit(run_chain(y, cal.hyper, config), y);
        CHECK(r.flags.empty());
    }

    SUBCASE("J too small is flagged") {
        // max / mean around 50: one huge value among many small ones.
        std::vector<double> v(99, 1.0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = 0.5 + 0.01 * static_cast<double>(i);
        }
        v.push_back(80.0);
        const Observations y(v);
        REQUIRE(y.max() / (y.sum() / y.size()) > 40.0);
        const Hyperparams hyper{3, 1, 1.0};
        ChainConfig config;
        config.iterations = 2000;
        config.burn_in = 500;
        const PosteriorDraws draws = run_chain(y, hyper, config);
        // The top component cannot reach the largest value.
        const GsmParams fitted = posterior_mean_params(draws);
        CHECK(fitted.component_mean(3) < y.max());
        const DiagnosticReport r = diagnose_fit(draws, y);
        CHECK(std::find(r.flags.begin(), r.flags.end(), FLAG_J_TOO_SMALL) != r.flags.end());
    }
}
