#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace havok {

/// The nine candidate families of the forcing-term goodness-of-fit study.
/// "extreme_value" is the minimum-convention Gumbel (the convention whose
/// fitted location sits above the sample mean, matching common tooling).
enum class Family {
    normal,
    beta,
    exponential,
    extreme_value,
    gamma,
    gev,
    lognormal,
    student_t,
    weibull,
};

std::string_view family_name(Family family);
Family family_from_string(const std::string& name);
std::vector<Family> all_families();

struct NormalParams {
    double mu, sigma;
};
/// Fitted on y = eps + (1-2*eps) * (x - lo) / (hi - lo); the map is part
/// of the fitted object so the CDF applies to raw data.
struct BetaParams {
    double a, b;
    double lo, hi, eps;
};
struct ExponentialParams {
    double mu; ///< mean
};
/// Minimum-convention Gumbel: F(x) = 1 - exp(-exp((x - mu) / sigma)).
struct GumbelMinParams {
    double mu, sigma;
};
struct GammaParams {
    double a, b; ///< shape, scale
};
/// Shape convention with F(x) = exp(-(1 + k z)^(-1/k)), z = (x-mu)/sigma;
/// k > 0 is the heavy-tailed branch.
struct GevParams {
    double k, mu, sigma;
};
struct LognormalParams {
    double mu, sigma; ///< of log(x)
};
struct StudentTParams {
    double mu, sigma, nu; ///< location-scale t
};
struct WeibullParams {
    double scale_a, shape_b;
};

using DistParams = std::variant<NormalParams, BetaParams, ExponentialParams, GumbelMinParams,
                                GammaParams, GevParams, LognormalParams, StudentTParams,
                                WeibullParams>;

struct FittedDistribution {
    Family family;
    DistParams params;
    double loglik = 0.0;

    double cdf(double x) const;
    double log_pdf(double x) const;
    /// Parameters in the naming convention of the result tables.
    std::vector<std::pair<std::string, double>> named_params() const;
};

/// Maximum-likelihood fit of one family. Closed forms where they exist
/// (normal, exponential, lognormal); Newton or fixed-point iterations on
/// the profile likelihood for gamma, weibull, beta and the Gumbel; a
/// Nelder-Mead search seeded by (probability-weighted) moments for GEV
/// and the location-scale t. Positive-support families nudge exact zeros
/// to 1e-12 and reject negative samples with a domain error.
FittedDistribution fit_mle(std::span<const double> samples, Family family);

double log_likelihood(std::span<const double> samples, const FittedDistribution& dist);

/// Deterministic Nelder-Mead minimizer used by the non-smooth fits;
/// exposed for reuse in tests.
std::vector<double> nelder_mead(const std::vector<double>& start,
                                const std::vector<double>& step,
                                double (*objective)(const std::vector<double>&, const void*),
                                const void* context, int max_iter = 2000, double tol = 1e-10);

} // namespace havok
