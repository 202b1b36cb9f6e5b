#include "havok/stats.hpp"

#include <algorithm>
#include <cmath>

#include "havok/errors.hpp"

namespace havok {

std::vector<double> shift_positive(std::span<const double> v) {
    if (v.empty()) {
        throw DataError("shift_positive: empty series");
    }
    const double lo = *std::min_element(v.begin(), v.end());
    const double shift = std::abs(lo);
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x += shift;
    return out;
}

double kolmogorov_p(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.0) {
        // dual theta-series form, accurate for small arguments
        double sum = 0.0;
        const double c = M_PI * M_PI / (8.0 * x * x);
        for (int j = 1; j < 201; j += 2) {
            const double term = std::exp(-c * static_cast<double>(j) * static_cast<double>(j));
            sum += term;
            if (term < 1e-12) break;
        }
        const double p = 1.0 - std::sqrt(2.0 * M_PI) / x * sum;
        return std::clamp(p, 0.0, 1.0);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j < 201; ++j) {
        const double term = std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) * x * x);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsReport ks_test(std::span<const double> samples, const FittedDistribution& dist,
                 double significance) {
    if (samples.empty()) {
        throw DataError("ks_test: empty sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    const double n = static_cast<double>(sorted.size());
    double d_stat = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = dist.cdf(sorted[i]);
        const double upper = static_cast<double>(i + 1) / n - f;
        const double lower = f - static_cast<double>(i) / n;
        d_stat = std::max({d_stat, upper, lower});
    }

    KsReport report;
    report.statistic = d_stat;
    report.n = sorted.size();
    report.significance = significance;
    report.p_value = kolmogorov_p(std::sqrt(n) * d_stat);
    report.pass = report.p_value >= significance;
    return report;
}

std::vector<FamilyOutcome> best_fit(std::span<const double> samples,
                                    const std::vector<Family>& families, double significance) {
    if (families.empty()) {
        throw ConfigError("best_fit: no families requested");
    }
    std::vector<FamilyOutcome> outcomes;
    outcomes.reserve(families.size());
    std::size_t fitted = 0;
    for (Family family : families) {
        FamilyOutcome outcome;
        outcome.family = family;
        try {
            outcome.fit = fit_mle(samples, family);
            outcome.ks = ks_test(samples, *outcome.fit, significance);
            ++fitted;
        } catch (const Error& e) {
            outcome.fit.reset();
            outcome.ks.reset();
            outcome.skip_reason = e.what();
        }
        outcomes.push_back(std::move(outcome));
    }
    if (fitted == 0) {
        throw NumericError("best_fit: every requested family failed or was skipped");
    }

    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const FamilyOutcome& a, const FamilyOutcome& b) {
                         if (a.ks.has_value() != b.ks.has_value()) return a.ks.has_value();
                         if (!a.ks) return false;
                         return a.ks->p_value > b.ks->p_value;
                     });
    return outcomes;
}

} // namespace havok
