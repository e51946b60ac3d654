#include "gsm/calibrate.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gsm/inference.hpp"

namespace gsm {

ThetaSuggestion suggest_theta_tilde(const Observations& y, std::size_t n_components) {
    if (y.empty()) {
        throw std::invalid_argument("suggest_theta_tilde: no observations");
    }
    if (n_components < 1) {
        throw std::invalid_argument("suggest_theta_tilde: J must be at least 1");
    }
    const double theta_tilde = static_cast<double>(n_components) / y.max();
    return {theta_tilde, 1.0 / theta_tilde <= y.min()};
}

Calibration calibrate(const Observations& y, const CalibrationInput& input) {
    if (!(input.omega > 0.0 && input.omega < 1.0)) {
        throw std::invalid_argument("calibrate: omega must lie in (0, 1)");
    }
    const ThetaSuggestion suggestion = suggest_theta_tilde(y, input.n_components);
    Calibration out;
    out.theta_tilde = suggestion.theta_tilde;
    out.spans_range = suggestion.spans_range;
    out.hyper.n_components = input.n_components;
    out.hyper.beta = input.omega * y.sum() / (1.0 - input.omega);
    // std::llround rounds halfway cases away from zero.
    out.hyper.alpha = std::max<std::int64_t>(1, std::llround(out.theta_tilde * out.hyper.beta));
    if (!out.spans_range) {
        std::ostringstream msg;
        msg << "first component mean 1/theta_tilde = " << 1.0 / out.theta_tilde << " exceeds min(y) = " << y.min()
            << "; consider a larger J or a log/root transform of the data";
        out.warnings.push_back(msg.str());
    }
    if (input.omega < 0.2 || input.omega > 0.5) {
        out.warnings.push_back("omega outside the usual 0.2-0.5 range");
    }
    return out;
}

DiagnosticReport diagnose_fit(const PosteriorDraws& draws, const Observations& y) {
    if (draws.size() < 2) {
        throw std::invalid_argument("diagnose_fit: need at least two draws");
    }
    DiagnosticReport report;
    report.mean_draws = moment_trace(draws, 1);
    report.var_draws = moment_trace(draws, 2);

    const auto n = static_cast<double>(y.size());
    report.sample_mean = y.sum() / n;
    double ss = 0.0;
    for (double v : y.values()) {
        ss += (v - report.sample_mean) * (v - report.sample_mean);
    }
    report.sample_var = y.size() > 1 ? ss / (n - 1.0) : 0.0;

    auto outside = [](std::span<const double> trace, double value) {
        return value < quantile(trace, 0.005) || value > quantile(trace, 0.995);
    };
    if (outside(report.mean_draws, report.sample_mean)) {
        report.flags.emplace_back(FLAG_MEAN);
    }
    if (y.size() > 1 && outside(report.var_draws, report.sample_var)) {
        report.flags.emplace_back(FLAG_VARIANCE);
    }

    const WeightSummary summary = weight_summary(draws);
    report.occupied_hist = summary.occupied_histogram;
    for (std::size_t j = summary.posterior_mean_weights.size(); j >= 1; --j) {
        if (summary.posterior_mean_weights[j - 1] >= HEAVY_WEIGHT) {
            report.heaviest_used_component = j;
            break;
        }
    }
    if (static_cast<double>(report.heaviest_used_component) > 0.9 * static_cast<double>(draws.n_components())) {
        report.flags.emplace_back(FLAG_J_TOO_SMALL);
    }
    return report;
}

}  // namespace gsm
