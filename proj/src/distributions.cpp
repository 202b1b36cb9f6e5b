#include "havok/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "havok/errors.hpp"

namespace havok {

namespace {

constexpr double kEulerGamma = 0.57721566490153286;
constexpr double kBad = 1e50; // objective value for out-of-support parameters

double mean_of(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    return m / static_cast<double>(x.size());
}

double pop_var(std::span<const double> x, double mean) {
    double v = 0.0;
    for (double s : x) v += (s - mean) * (s - mean);
    return v / static_cast<double>(x.size());
}

void require_samples(std::span<const double> x, Family family) {
    if (x.size() < 10) {
        throw DataError(std::string("mle: family ") + std::string(family_name(family)) +
                        " needs at least 10 samples, got " + std::to_string(x.size()));
    }
}

/// Positive-support families: nudge exact zeros up, reject negatives.
std::vector<double> positive_samples(std::span<const double> x, Family family) {
    std::vector<double> out(x.begin(), x.end());
    for (double& v : out) {
        if (v == 0.0) v = 1e-12;
        if (v < 0.0) {
            throw DataError(std::string("mle: family ") + std::string(family_name(family)) +
                            " requires positive samples");
        }
    }
    return out;
}

} // namespace

std::string_view family_name(Family family) {
    switch (family) {
        case Family::normal: return "normal";
        case Family::beta: return "beta";
        case Family::exponential: return "exponential";
        case Family::extreme_value: return "extreme-value";
        case Family::gamma: return "gamma";
        case Family::gev: return "gev";
        case Family::lognormal: return "lognormal";
        case Family::student_t: return "student-t";
        case Family::weibull: return "weibull";
    }
    return "?";
}

Family family_from_string(const std::string& name) {
    for (Family f : all_families()) {
        if (name == family_name(f)) return f;
    }
    throw ConfigError("unknown distribution family '" + name + "'");
}

std::vector<Family> all_families() {
    return {Family::normal,    Family::beta,      Family::exponential,
            Family::extreme_value, Family::gamma, Family::gev,
            Family::lognormal, Family::student_t, Family::weibull};
}

// ---------------------------------------------------------------------------
// densities and CDFs

namespace {

double gev_log_pdf(const GevParams& p, double x) {
    const double z = (x - p.mu) / p.sigma;
    if (std::abs(p.k) < 1e-12) {
        return -std::log(p.sigma) - z - std::exp(-z);
    }
    const double t = 1.0 + p.k * z;
    if (t <= 0.0) return -std::numeric_limits<double>::infinity();
    return -std::log(p.sigma) - (1.0 + 1.0 / p.k) * std::log(t) - std::pow(t, -1.0 / p.k);
}

double gev_cdf(const GevParams& p, double x) {
    const double z = (x - p.mu) / p.sigma;
    if (std::abs(p.k) < 1e-12) {
        return std::exp(-std::exp(-z));
    }
    const double t = 1.0 + p.k * z;
    if (t <= 0.0) return p.k > 0.0 ? 0.0 : 1.0;
    return std::exp(-std::pow(t, -1.0 / p.k));
}

double student_t_log_pdf(const StudentTParams& p, double x) {
    const double z = (x - p.mu) / p.sigma;
    return std::lgamma(0.5 * (p.nu + 1.0)) - std::lgamma(0.5 * p.nu) -
           0.5 * std::log(p.nu * M_PI) - std::log(p.sigma) -
           0.5 * (p.nu + 1.0) * std::log1p(z * z / p.nu);
}

double student_t_cdf(const StudentTParams& p, double x) {
    const double z = (x - p.mu) / p.sigma;
    // via the regularized incomplete beta function
    const double w = p.nu / (p.nu + z * z);
    const double half = 0.5 * boost::math::ibeta(0.5 * p.nu, 0.5, w);
    return z > 0.0 ? 1.0 - half : half;
}

double beta_map(const BetaParams& p, double x) {
    if (p.hi <= p.lo) return 0.5;
    const double y = p.eps + (1.0 - 2.0 * p.eps) * (x - p.lo) / (p.hi - p.lo);
    return std::min(std::max(y, 0.0), 1.0);
}

} // namespace

double FittedDistribution::cdf(double x) const {
    return std::visit(
        [x](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, NormalParams>) {
                return 0.5 * std::erfc(-(x - p.mu) / (p.sigma * M_SQRT2));
            } else if constexpr (std::is_same_v<T, BetaParams>) {
                return boost::math::ibeta(p.a, p.b, beta_map(p, x));
            } else if constexpr (std::is_same_v<T, ExponentialParams>) {
                return x <= 0.0 ? 0.0 : -std::expm1(-x / p.mu);
            } else if constexpr (std::is_same_v<T, GumbelMinParams>) {
                return -std::expm1(-std::exp((x - p.mu) / p.sigma));
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                return x <= 0.0 ? 0.0 : boost::math::gamma_p(p.a, x / p.b);
            } else if constexpr (std::is_same_v<T, GevParams>) {
                return gev_cdf(p, x);
            } else if constexpr (std::is_same_v<T, LognormalParams>) {
                if (x <= 0.0) return 0.0;
                return 0.5 * std::erfc(-(std::log(x) - p.mu) / (p.sigma * M_SQRT2));
            } else if constexpr (std::is_same_v<T, StudentTParams>) {
                return student_t_cdf(p, x);
            } else {
                static_assert(std::is_same_v<T, WeibullParams>);
                if (x <= 0.0) return 0.0;
                return -std::expm1(-std::pow(x / p.scale_a, p.shape_b));
            }
        },
        params);
}

double FittedDistribution::log_pdf(double x) const {
    return std::visit(
        [x](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            constexpr double kNegInf = -std::numeric_limits<double>::infinity();
            if constexpr (std::is_same_v<T, NormalParams>) {
                const double z = (x - p.mu) / p.sigma;
                return -0.5 * z * z - std::log(p.sigma) - 0.5 * std::log(2.0 * M_PI);
            } else if constexpr (std::is_same_v<T, BetaParams>) {
                const double y = beta_map(p, x);
                if (y <= 0.0 || y >= 1.0) return kNegInf;
                const double jac = (1.0 - 2.0 * p.eps) / (p.hi - p.lo);
                return (p.a - 1.0) * std::log(y) + (p.b - 1.0) * std::log1p(-y) -
                       (std::lgamma(p.a) + std::lgamma(p.b) - std::lgamma(p.a + p.b)) +
                       std::log(jac);
            } else if constexpr (std::is_same_v<T, ExponentialParams>) {
                return x < 0.0 ? kNegInf : -std::log(p.mu) - x / p.mu;
            } else if constexpr (std::is_same_v<T, GumbelMinParams>) {
                const double u = (x - p.mu) / p.sigma;
                return u - std::exp(u) - std::log(p.sigma);
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                if (x <= 0.0) return kNegInf;
                return (p.a - 1.0) * std::log(x) - x / p.b - std::lgamma(p.a) -
                       p.a * std::log(p.b);
            } else if constexpr (std::is_same_v<T, GevParams>) {
                return gev_log_pdf(p, x);
            } else if constexpr (std::is_same_v<T, LognormalParams>) {
                if (x <= 0.0) return kNegInf;
                const double z = (std::log(x) - p.mu) / p.sigma;
                return -0.5 * z * z - std::log(x * p.sigma) - 0.5 * std::log(2.0 * M_PI);
            } else if constexpr (std::is_same_v<T, StudentTParams>) {
                return student_t_log_pdf(p, x);
            } else {
                static_assert(std::is_same_v<T, WeibullParams>);
                if (x <= 0.0) return kNegInf;
                const double z = x / p.scale_a;
                return std::log(p.shape_b / p.scale_a) + (p.shape_b - 1.0) * std::log(z) -
                       std::pow(z, p.shape_b);
            }
        },
        params);
}

std::vector<std::pair<std::string, double>> FittedDistribution::named_params() const {
    return std::visit(
        [](const auto& p) -> std::vector<std::pair<std::string, double>> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, NormalParams>) {
                return {{"mu", p.mu}, {"sigma", p.sigma}};
            } else if constexpr (std::is_same_v<T, BetaParams>) {
                return {{"a", p.a}, {"b", p.b}, {"rescale_lo", p.lo}, {"rescale_hi", p.hi}};
            } else if constexpr (std::is_same_v<T, ExponentialParams>) {
                return {{"mu", p.mu}};
            } else if constexpr (std::is_same_v<T, GumbelMinParams>) {
                return {{"mu", p.mu}, {"sigma", p.sigma}};
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                return {{"a", p.a}, {"b", p.b}};
            } else if constexpr (std::is_same_v<T, GevParams>) {
                return {{"k", p.k}, {"mu", p.mu}, {"sigma", p.sigma}};
            } else if constexpr (std::is_same_v<T, LognormalParams>) {
                return {{"mu", p.mu}, {"sigma", p.sigma}};
            } else if constexpr (std::is_same_v<T, StudentTParams>) {
                return {{"mu", p.mu}, {"sigma", p.sigma}, {"v", p.nu}};
            } else {
                static_assert(std::is_same_v<T, WeibullParams>);
                return {{"A", p.scale_a}, {"B", p.shape_b}};
            }
        },
        params);
}

double log_likelihood(std::span<const double> samples, const FittedDistribution& dist) {
    double total = 0.0;
    for (double x : samples) total += dist.log_pdf(x);
    return total;
}

// ---------------------------------------------------------------------------
// Nelder-Mead

std::vector<double> nelder_mead(const std::vector<double>& start, const std::vector<double>& step,
                                double (*objective)(const std::vector<double>&, const void*),
                                const void* context, int max_iter, double tol) {
    const std::size_t dim = start.size();
    std::vector<std::vector<double>> simplex(dim + 1, start);
    for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += step[i];
    std::vector<double> value(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) value[i] = objective(simplex[i], context);

    std::vector<std::size_t> order(dim + 1);
    for (int iter = 0; iter < max_iter; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
        const std::size_t best = order.front(), worst = order.back(),
                          second_worst = order[dim - 1];
        if (std::abs(value[worst] - value[best]) <= tol * (1.0 + std::abs(value[best]))) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[i][d];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        auto blend = [&](double coef) {
            std::vector<double> p(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                p[d] = centroid[d] + coef * (simplex[worst][d] - centroid[d]);
            }
            return p;
        };

        const auto reflected = blend(-1.0);
        const double f_reflected = objective(reflected, context);
        if (f_reflected < value[best]) {
            const auto expanded = blend(-2.0);
            const double f_expanded = objective(expanded, context);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                value[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                value[worst] = f_reflected;
            }
        } else if (f_reflected < value[second_worst]) {
            simplex[worst] = reflected;
            value[worst] = f_reflected;
        } else {
            const auto contracted = blend(0.5);
            const double f_contracted = objective(contracted, context);
            if (f_contracted < value[worst]) {
                simplex[worst] = contracted;
                value[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < dim; ++d) {
                        simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
                    }
                    value[i] = objective(simplex[i], context);
                }
            }
        }
    }

    const std::size_t winner = static_cast<std::size_t>(
        std::min_element(value.begin(), value.end()) - value.begin());
    return simplex[winner];
}

// ---------------------------------------------------------------------------
// per-family fits

namespace {

FittedDistribution fit_normal(std::span<const double> x) {
    const double mu = mean_of(x);
    const double sigma = std::sqrt(pop_var(x, mu));
    if (sigma <= 0.0) {
        throw DataError("mle: normal fit needs nonzero variance");
    }
    FittedDistribution d{Family::normal, NormalParams{mu, sigma}};
    d.loglik = log_likelihood(x, d);
    return d;
}

FittedDistribution fit_exponential(std::span<const double> raw) {
    const auto x = positive_samples(raw, Family::exponential);
    FittedDistribution d{Family::exponential, ExponentialParams{mean_of(x)}};
    d.loglik = log_likelihood(x, d);
    return d;
}

FittedDistribution fit_lognormal(std::span<const double> raw) {
    const auto x = positive_samples(raw, Family::lognormal);
    std::vector<double> logs(x.size());
    std::transform(x.begin(), x.end(), logs.begin(), [](double v) { return std::log(v); });
    const double mu = mean_of(logs);
    const double sigma = std::sqrt(pop_var(logs, mu));
    if (sigma <= 0.0) {
        throw DataError("mle: lognormal fit needs nonzero log-variance");
    }
    FittedDistribution d{Family::lognormal, LognormalParams{mu, sigma}};
    d.loglik = log_likelihood(x, d);
    return d;
}

FittedDistribution fit_gamma(std::span<const double> raw) {
    const auto x = positive_samples(raw, Family::gamma);
    const double mean = mean_of(x);
    double mean_log = 0.0;
    for (double v : x) mean_log += std::log(v);
    mean_log /= static_cast<double>(x.size());

    const double s = std::log(mean) - mean_log;
    if (!(s > 0.0)) {
        throw DataError("mle: gamma fit is degenerate (zero spread)");
    }
    double a = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    // Newton on the profile-likelihood score: log(a) - digamma(a) = s
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        const double f = std::log(a) - boost::math::digamma(a) - s;
        const double fprime = 1.0 / a - boost::math::trigamma(a);
        const double next = a - f / fprime;
        if (!(next > 0.0)) {
            a *= 0.5;
            continue;
        }
        if (std::abs(next - a) <= 1e-12 * a) {
            a = next;
            converged = true;
            break;
        }
        a = next;
    }
    if (!converged) {
        throw NumericError("mle: gamma shape iteration did not converge");
    }
    FittedDistribution d{Family::gamma, GammaParams{a, mean / a}};
    d.loglik = log_likelihood(x, d);
    return d;
}

FittedDistribution fit_weibull(std::span<const double> raw) {
    const auto x = positive_samples(raw, Family::weibull);
    std::vector<double> logs(x.size());
    std::transform(x.begin(), x.end(), logs.begin(), [](double v) { return std::log(v); });
    const double mean_log = mean_of(logs);
    const double sd_log = std::sqrt(pop_var(logs, mean_log));
    if (sd_log <= 0.0) {
        throw DataError("mle: weibull fit is degenerate (zero spread)");
    }

    double b = M_PI / (std::sqrt(6.0) * sd_log); // moment-based start
    auto score = [&](double shape, double& deriv) {
        // stabilized with w = (v / x_max)^shape
        const double x_max = *std::max_element(x.begin(), x.end());
        double sw = 0.0, swl = 0.0, swll = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double w = std::pow(x[i] / x_max, shape);
            sw += w;
            swl += w * logs[i];
            swll += w * logs[i] * logs[i];
        }
        const double ratio = swl / sw;
        deriv = (swll * sw - swl * swl) / (sw * sw) + 1.0 / (shape * shape);
        return ratio - 1.0 / shape - mean_log;
    };

    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        double deriv = 0.0;
        const double f = score(b, deriv);
        const double next = b - f / deriv;
        if (!(next > 0.0)) {
            b *= 0.5;
            continue;
        }
        if (std::abs(next - b) <= 1e-12 * b) {
            b = next;
            converged = true;
            break;
        }
        b = next;
    }
    if (!converged) {
        throw NumericError("mle: weibull shape iteration did not converge");
    }

    double power_mean = 0.0;
    for (double v : x) power_mean += std::pow(v, b);
    power_mean /= static_cast<double>(x.size());
    const double a = std::pow(power_mean, 1.0 / b);
    FittedDistribution d{Family::weibull, WeibullParams{a, b}};
    d.loglik = log_likelihood(x, d);
    return d;
}

FittedDistribution fit_beta(std::span<const double> x) {
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi <= lo) {
        throw DataError("mle: beta fit needs a nonzero data range");
    }
    const double eps = 1e-9;
    std::vector<double> y(x.size());
    double s1 = 0.0, s2 = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = eps + (1.0 - 2.0 * eps) * (x[i] - lo) / (hi - lo);
        s1 += std::log(y[i]);
        s2 += std::log1p(-y[i]);
        mean += y[i];
    }
    const double n = static_cast<double>(x.size());
    mean /= n;
    const double var = pop_var(y, mean);
    const double common = std::max(mean * (1.0 - mean) / std::max(var, 1e-12) - 1.0, 1e-3);
    double a = std::max(mean * common, 1e-3);
    double b = std::max((1.0 - mean) * common, 1e-3);

    auto loglik_ab = [&](double aa, double bb) {
        return (aa - 1.0) * s1 + (bb - 1.0) * s2 -
               n * (std::lgamma(aa) + std::lgamma(bb) - std::lgamma(aa + bb));
    };

    // damped Newton on the concave log-likelihood
    double current = loglik_ab(a, b);
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        const double psi_ab = boost::math::digamma(a + b);
        const double g1 = n * (psi_ab - boost::math::digamma(a)) + s1;
        const double g2 = n * (psi_ab - boost::math::digamma(b)) + s2;
        const double t_ab = boost::math::trigamma(a + b);
        const double h11 = n * (t_ab - boost::math::trigamma(a));
        const double h22 = n * (t_ab - boost::math::trigamma(b));
        const double h12 = n * t_ab;
        const double det = h11 * h22 - h12 * h12;
        if (det == 0.0) break;
        double da = -(h22 * g1 - h12 * g2) / det;
        double db = -(h11 * g2 - h12 * g1) / det;
        double scale = 1.0;
        for (int half = 0; half < 40; ++half) {
            const double na = a + scale * da, nb = b + scale * db;
            if (na > 0.0 && nb > 0.0) {
                const double next = loglik_ab(na, nb);
                if (next >= current - 1e-12 * std::abs(current)) {
                    a = na;
                    b = nb;
                    current = next;
                    break;
                }
            }
            scale *= 0.5;
        }
        if (std::abs(g1) + std::abs(g2) <= 1e-8 * n) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NumericError("mle: beta Newton iteration did not converge");
    }
    FittedDistribution d{Family::beta, BetaParams{a, b, lo, hi, eps}};
    d.loglik = log_likelihood(x, d);
    return d;
}

FittedDistribution fit_gumbel_min(std::span<const double> x) {
    const double mean = mean_of(x);
    const double sd = std::sqrt(pop_var(x, mean));
    if (sd <= 0.0) {
        throw DataError("mle: extreme-value fit needs nonzero variance");
    }
    const double x_max = *std::max_element(x.begin(), x.end());
    double sigma = sd * std::sqrt(6.0) / M_PI;
    // fixed point of the profile score; weights stabilized by x_max
    bool converged = false;
    for (int iter = 0; iter < 500; ++iter) {
        double sw = 0.0, swx = 0.0;
        for (double v : x) {
            const double w = std::exp((v - x_max) / sigma);
            sw += w;
            swx += w * v;
        }
        const double next = swx / sw - mean;
        if (!(next > 0.0)) {
            throw NumericError("mle: extreme-value scale iteration left the domain");
        }
        if (std::abs(next - sigma) <= 1e-12 * sigma) {
            sigma = next;
            converged = true;
            break;
        }
        sigma = next;
    }
    if (!converged) {
        throw NumericError("mle: extreme-value scale iteration did not converge");
    }
    double sw = 0.0;
    for (double v : x) sw += std::exp((v - x_max) / sigma);
    const double mu = x_max + sigma * std::log(sw / static_cast<double>(x.size()));
    FittedDistribution d{Family::extreme_value, GumbelMinParams{mu, sigma}};
    d.loglik = log_likelihood(x, d);
    return d;
}

struct GevContext {
    std::span<const double> samples;
};

double gev_objective(const std::vector<double>& theta, const void* ctx) {
    const auto* c = static_cast<const GevContext*>(ctx);
    const GevParams p{theta[0], theta[2], std::exp(theta[1])};
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) return kBad;
    double nll = 0.0;
    for (double x : c->samples) {
        const double lp = gev_log_pdf(p, x);
        if (!std::isfinite(lp)) return kBad;
        nll -= lp;
    }
    return nll;
}

/// Probability-weighted-moment start (Hosking), converted to the k-sign
/// convention used here (k = -kappa_hosking).
GevParams gev_pwm_start(std::span<const double> samples) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double fi = static_cast<double>(i);
        b0 += sorted[i];
        b1 += sorted[i] * fi / (n - 1.0);
        b2 += sorted[i] * fi * (fi - 1.0) / ((n - 1.0) * (n - 2.0));
    }
    b0 /= n;
    b1 /= n;
    b2 /= n;
    const double l1 = b0, l2 = 2.0 * b1 - b0, l3 = 6.0 * b2 - 6.0 * b1 + b0;
    const double t3 = l3 / l2;
    const double c = 2.0 / (3.0 + t3) - std::log(2.0) / std::log(3.0);
    const double kappa = 7.8590 * c + 2.9554 * c * c;
    if (std::abs(kappa) < 1e-8) {
        const double sigma = l2 / std::log(2.0);
        return GevParams{0.0, l1 - kEulerGamma * sigma, sigma};
    }
    const double gamma_term = std::tgamma(1.0 + kappa);
    const double sigma = l2 * kappa / (gamma_term * (1.0 - std::pow(2.0, -kappa)));
    const double mu = l1 - sigma * (1.0 - gamma_term) / kappa;
    return GevParams{-kappa, mu, sigma};
}

FittedDistribution fit_gev(std::span<const double> x) {
    const GevParams start = gev_pwm_start(x);
    GevContext ctx{x};
    const std::vector<double> theta0 = {start.k, std::log(start.sigma), start.mu};
    const std::vector<double> steps = {0.05, 0.1, 0.1 * start.sigma + 1e-6};
    const auto theta = nelder_mead(theta0, steps, gev_objective, &ctx, 3000, 1e-12);

    const double f_start = gev_objective(theta0, &ctx);
    const double f_final = gev_objective(theta, &ctx);
    if (f_final >= kBad && f_start >= kBad) {
        throw NumericError("mle: gev search found no feasible parameters");
    }
    // the optimizer never reports something worse than its start
    const auto& best = f_final <= f_start ? theta : theta0;
    FittedDistribution d{Family::gev, GevParams{best[0], best[2], std::exp(best[1])}};
    d.loglik = log_likelihood(x, d);
    return d;
}

struct StudentTContext {
    std::span<const double> samples;
};

double student_t_objective(const std::vector<double>& theta, const void* ctx) {
    const auto* c = static_cast<const StudentTContext*>(ctx);
    const StudentTParams p{theta[0], std::exp(theta[1]), std::exp(theta[2])};
    if (!(p.sigma > 0.0) || !(p.nu > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.nu) ||
        p.nu > 1e6) {
        return kBad;
    }
    double nll = 0.0;
    for (double x : c->samples) nll -= student_t_log_pdf(p, x);
    return std::isfinite(nll) ? nll : kBad;
}

FittedDistribution fit_student_t(std::span<const double> x) {
    const double mean = mean_of(x);
    const double var = pop_var(x, mean);
    if (var <= 0.0) {
        throw DataError("mle: student-t fit needs nonzero variance");
    }
    double m4 = 0.0;
    for (double v : x) m4 += std::pow(v - mean, 4);
    m4 /= static_cast<double>(x.size());
    const double excess = m4 / (var * var) - 3.0;
    const double nu0 = excess > 0.3 ? std::clamp(6.0 / excess + 4.0, 2.2, 50.0) : 20.0;
    const double sigma0 = std::sqrt(var * std::max(nu0 - 2.0, 0.5) / nu0);

    StudentTContext ctx{x};
    const std::vector<double> theta0 = {mean, std::log(sigma0), std::log(nu0)};
    const std::vector<double> steps = {0.1 * sigma0 + 1e-6, 0.1, 0.2};
    const auto theta = nelder_mead(theta0, steps, student_t_objective, &ctx, 3000, 1e-12);

    const auto& best =
        student_t_objective(theta, &ctx) <= student_t_objective(theta0, &ctx) ? theta : theta0;
    FittedDistribution d{Family::student_t,
                         StudentTParams{best[0], std::exp(best[1]), std::exp(best[2])}};
    d.loglik = log_likelihood(x, d);
    return d;
}

} // namespace

FittedDistribution fit_mle(std::span<const double> samples, Family family) {
    require_samples(samples, family);
    switch (family) {
        case Family::normal: return fit_normal(samples);
        case Family::beta: return fit_beta(samples);
        case Family::exponential: return fit_exponential(samples);
        case Family::extreme_value: return fit_gumbel_min(samples);
        case Family::gamma: return fit_gamma(samples);
        case Family::gev: return fit_gev(samples);
        case Family::lognormal: return fit_lognormal(samples);
        case Family::student_t: return fit_student_t(samples);
        case Family::weibull: return fit_weibull(samples);
    }
    throw ConfigError("fit_mle: unknown family");
}

} // namespace havok
