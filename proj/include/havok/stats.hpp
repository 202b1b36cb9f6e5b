#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "havok/distributions.hpp"

namespace havok {

/// Add |min(v)| to every element so the minimum lands exactly on zero
/// (the rule is literal: an all-positive series still shifts up by its
/// minimum's magnitude).
std::vector<double> shift_positive(std::span<const double> v);

struct KsReport {
    double statistic = 0.0; ///< sup-distance D_n
    double p_value = 1.0;
    bool pass = true; ///< p_value >= significance
    std::size_t n = 0;
    double significance = 0.05;
};

/// Asymptotic Kolmogorov survival function Q(x) evaluated at x = sqrt(n) D_n,
/// with the series truncated once terms fall below 1e-12.
double kolmogorov_p(double x);

/// One-sample K-S test of `samples` against the fitted CDF. The parameters
/// were estimated from the same data, as in the source procedure; the
/// resulting p-values are known to be conservative and are reported as-is.
KsReport ks_test(std::span<const double> samples, const FittedDistribution& dist,
                 double significance = 0.05);

struct FamilyOutcome {
    Family family;
    std::optional<FittedDistribution> fit;
    std::optional<KsReport> ks;
    std::string skip_reason; ///< nonempty when the family was skipped
};

/// Fit and test every requested family, ranking the fitted ones by
/// descending p-value (skipped families trail with their reason).
/// Throws NumericError when no family could be fitted at all.
std::vector<FamilyOutcome> best_fit(std::span<const double> samples,
                                    const std::vector<Family>& families,
                                    double significance = 0.05);

} // namespace havok
