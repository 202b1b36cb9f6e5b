#include "havok/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "havok/errors.hpp"

namespace havok {

namespace {

/// Bin index in [0, bins) over [lo, hi]; the top edge folds into the last bin.
inline int bin_of(double v, double lo, double inv_width, int bins) {
    const int b = static_cast<int>((v - lo) * inv_width);
    return std::min(std::max(b, 0), bins - 1);
}

} // namespace

double ami(const Sequence& x, int tau, int bins) {
    if (tau < 0) {
        throw ConfigError("ami: tau must be >= 0");
    }
    if (bins < 2) {
        throw ConfigError("ami: bins must be >= 2");
    }
    const auto& v = x.values();
    const auto n = static_cast<std::ptrdiff_t>(v.size());
    const std::ptrdiff_t pairs = n - tau;
    if (pairs < 2 * bins) {
        throw DataError("ami: only " + std::to_string(pairs) + " pairs at tau " +
                        std::to_string(tau) + ", need at least " + std::to_string(2 * bins));
    }

    double lo_a = v[0], hi_a = v[0], lo_b = v[static_cast<std::size_t>(tau)], hi_b = lo_b;
    for (std::ptrdiff_t i = 0; i < pairs; ++i) {
        const double a = v[static_cast<std::size_t>(i)];
        const double b = v[static_cast<std::size_t>(i + tau)];
        lo_a = std::min(lo_a, a);
        hi_a = std::max(hi_a, a);
        lo_b = std::min(lo_b, b);
        hi_b = std::max(hi_b, b);
    }
    if (hi_a == lo_a || hi_b == lo_b) {
        throw DataError("ami: sequence '" + x.id() + "' is constant over the pair window");
    }

    const double inv_a = static_cast<double>(bins) / (hi_a - lo_a);
    const double inv_b = static_cast<double>(bins) / (hi_b - lo_b);
    std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
    std::vector<double> marg_a(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> marg_b(static_cast<std::size_t>(bins), 0.0);
    const double w = 1.0 / static_cast<double>(pairs);
    for (std::ptrdiff_t i = 0; i < pairs; ++i) {
        const int ba = bin_of(v[static_cast<std::size_t>(i)], lo_a, inv_a, bins);
        const int bb = bin_of(v[static_cast<std::size_t>(i + tau)], lo_b, inv_b, bins);
        joint[static_cast<std::size_t>(ba * bins + bb)] += w;
        marg_a[static_cast<std::size_t>(ba)] += w;
        marg_b[static_cast<std::size_t>(bb)] += w;
    }

    double info = 0.0;
    for (int a = 0; a < bins; ++a) {
        for (int b = 0; b < bins; ++b) {
            const double p = joint[static_cast<std::size_t>(a * bins + b)];
            if (p > 0.0) {
                info += p * std::log(p / (marg_a[static_cast<std::size_t>(a)] *
                                          marg_b[static_cast<std::size_t>(b)]));
            }
        }
    }
    return info;
}

DelayScan select_delay(const Sequence& x, int tau_max, int bins) {
    if (tau_max < 2) {
        throw ConfigError("select_delay: tau_max must be >= 2");
    }
    DelayScan scan;
    scan.curve.reserve(static_cast<std::size_t>(tau_max));
    const double at_zero = ami(x, 0, bins); // left anchor: always the maximum
    for (int tau = 1; tau <= tau_max; ++tau) {
        scan.curve.push_back(ami(x, tau, bins));
    }

    for (int tau = 1; tau < tau_max; ++tau) {
        const double left = tau == 1 ? at_zero : scan.curve[static_cast<std::size_t>(tau - 2)];
        const double here = scan.curve[static_cast<std::size_t>(tau - 1)];
        const double right = scan.curve[static_cast<std::size_t>(tau)];
        if (here < left && here < right) {
            scan.tau = tau;
            scan.local_minimum_found = true;
            return scan;
        }
    }

    scan.local_minimum_found = false;
    scan.tau = 1 + static_cast<int>(std::min_element(scan.curve.begin(), scan.curve.end()) -
                                    scan.curve.begin());
    return scan;
}

double fnn_percentage(const Sequence& x, int tau, int d, double r_tol, double a_tol) {
    if (tau < 1 || d < 1) {
        throw ConfigError("fnn: tau and d must be >= 1");
    }
    const auto& v = x.values();
    const auto n = static_cast<std::ptrdiff_t>(v.size());
    // points must be embeddable at dimension d+1
    const std::ptrdiff_t count = n - static_cast<std::ptrdiff_t>(d) * tau;
    if (count < 2) {
        throw DataError("fnn: sequence '" + x.id() + "' too short for dimension " +
                        std::to_string(d + 1) + " at tau " + std::to_string(tau));
    }

    double mean = 0.0;
    for (double s : v) mean += s;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double s : v) var += (s - mean) * (s - mean);
    var /= static_cast<double>(n);
    const double sigma = std::sqrt(var);
    if (sigma == 0.0) {
        throw DataError("fnn: sequence '" + x.id() + "' is constant");
    }

    std::ptrdiff_t false_count = 0;
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        // brute-force nearest neighbor in d-space
        std::ptrdiff_t nearest = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::ptrdiff_t j = 0; j < count; ++j) {
            if (j == i) continue;
            double dist = 0.0;
            for (int c = 0; c < d; ++c) {
                const double diff = v[static_cast<std::size_t>(i + c * tau)] -
                                    v[static_cast<std::size_t>(j + c * tau)];
                dist += diff * diff;
                if (dist >= best) break;
            }
            if (dist < best) {
                best = dist;
                nearest = j;
            }
        }
        const double dist_d = std::sqrt(best);
        const double gap = std::abs(v[static_cast<std::size_t>(i + d * tau)] -
                                    v[static_cast<std::size_t>(nearest + d * tau)]);
        const double dist_d1 = std::sqrt(best + gap * gap);
        // multiplication form keeps dist_d == 0 well-defined
        if (gap > r_tol * dist_d || dist_d1 > a_tol * sigma) ++false_count;
    }
    return 100.0 * static_cast<double>(false_count) / static_cast<double>(count);
}

DimensionScan select_dimension(const Sequence& x, int tau, int d_max, double drop_threshold_pct,
                               double r_tol, double a_tol) {
    if (d_max < 2) {
        throw ConfigError("select_dimension: d_max must be >= 2");
    }
    DimensionScan scan;
    const double base = fnn_percentage(x, tau, 1, r_tol, a_tol);
    scan.curve.push_back(base);
    const double threshold = base * drop_threshold_pct / 100.0;

    scan.dim = d_max;
    scan.drop_found = false;
    if (base <= threshold) { // degenerate: already at zero
        scan.dim = 1;
        scan.drop_found = true;
    } else {
        for (int d = 2; d <= d_max; ++d) {
            scan.curve.push_back(fnn_percentage(x, tau, d, r_tol, a_tol));
            if (scan.curve.back() <= threshold) {
                scan.dim = d;
                scan.drop_found = true;
                break; // the sweep stops at selection; the tail is not informative
            }
        }
    }

    const auto min_it = std::min_element(scan.curve.begin(), scan.curve.end());
    for (auto it = min_it + 1; it < scan.curve.end(); ++it) {
        if (*it > *(it - 1)) {
            scan.rise_index = static_cast<int>(it - scan.curve.begin()) + 1;
            break;
        }
    }
    return scan;
}

HankelMatrix embed(const Sequence& x, EmbeddingConfig config) {
    if (config.tau < 1 || config.dim < 1) {
        throw ConfigError("embed: tau and dim must be >= 1");
    }
    const auto n = static_cast<Eigen::Index>(x.size());
    const Eigen::Index span = static_cast<Eigen::Index>(config.dim - 1) * config.tau;
    if (span >= n) {
        throw DataError("embed: sequence '" + x.id() + "' of length " + std::to_string(n) +
                        " cannot host dim " + std::to_string(config.dim) + " at tau " +
                        std::to_string(config.tau));
    }

    const Eigen::Index n_t = n - span;
    HankelMatrix h;
    h.config = config;
    h.data.resize(config.dim, n_t);
    const auto& v = x.values();
    for (Eigen::Index col = 0; col < n_t; ++col) {
        for (int row = 0; row < config.dim; ++row) {
            h.data(row, col) = v[static_cast<std::size_t>(col + row * config.tau)];
        }
    }
    return h;
}

} // namespace havok
