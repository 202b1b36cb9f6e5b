#include "havok/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "havok/errors.hpp"
#include "havok/fft.hpp"
#include "havok/rng.hpp"

namespace havok {

const std::array<std::string_view, kFeatureCount>& feature_names() {
    static const std::array<std::string_view, kFeatureCount> names = {
        "mean",           "std",       "skewness",           "excess_kurtosis",
        "lag1_autocorr",  "dom_freq",  "spectral_entropy",   "zero_cross_rate",
        "peak_to_peak",   "rms",
    };
    return names;
}

FeatureVector extract_features(const Sequence& s) {
    const auto& x = s.values();
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) {
        throw DataError("features: sequence '" + s.id() + "' too short");
    }

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 == 0.0) {
        throw DataError("features: sequence '" + s.id() + "' is constant");
    }
    const double sd = std::sqrt(m2);
    const double skewness = m3 / (m2 * sd);
    const double kurtosis = m4 / (m2 * m2) - 3.0;

    double acf_num = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        acf_num += (x[i] - mean) * (x[i + 1] - mean);
    }
    const double lag1 = acf_num / (m2 * n);

    const Periodogram pg = periodogram(x, s.dt());
    std::size_t arg_max = 0;
    double total_power = 0.0;
    for (std::size_t k = 0; k < pg.power.size(); ++k) {
        total_power += pg.power[k];
        if (pg.power[k] > pg.power[arg_max]) arg_max = k;
    }
    const double dom_freq = pg.frequency(arg_max);
    double entropy = 0.0;
    if (total_power > 0.0) {
        for (double p : pg.power) {
            if (p > 0.0) {
                const double q = p / total_power;
                entropy -= q * std::log(q);
            }
        }
        entropy /= std::log(static_cast<double>(pg.power.size()));
    }

    std::size_t crossings = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if ((x[i] > 0.0 && x[i + 1] < 0.0) || (x[i] < 0.0 && x[i + 1] > 0.0)) ++crossings;
    }
    const double zcr = static_cast<double>(crossings) / s.duration();

    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    double sum_sq = 0.0;
    for (double v : x) sum_sq += v * v;
    const double rms = std::sqrt(sum_sq / n);

    FeatureVector out;
    out.id = s.id();
    out.f = {mean, sd, skewness, kurtosis, lag1, dom_freq, entropy, zcr, *hi - *lo, rms};
    return out;
}

int rank_for_energy(const Eigen::VectorXd& eigenvalues, double target) {
    if (!(target > 0.0) || target > 1.0) {
        throw ConfigError("compress: energy target must lie in (0, 1]");
    }
    const double total = eigenvalues.sum();
    if (total <= 0.0) return 1;
    double cumulative = 0.0;
    for (int r = 0; r < eigenvalues.size(); ++r) {
        cumulative += eigenvalues[r];
        if (cumulative / total >= target) return r + 1;
    }
    return static_cast<int>(eigenvalues.size());
}

CompressedFeatures compress(const std::vector<FeatureVector>& features, double energy_target) {
    if (!(energy_target > 0.0) || energy_target > 1.0) {
        throw ConfigError("compress: energy target must lie in (0, 1]");
    }
    const auto n = static_cast<Eigen::Index>(features.size());
    if (n < 2) {
        throw DataError("compress: need at least 2 feature vectors");
    }

    Eigen::MatrixXd f(n, kFeatureCount);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) f(i, j) = features[i].f[j];
    }

    // column-standardize; zero-variance columns stay at zero
    for (int j = 0; j < kFeatureCount; ++j) {
        const double mean = f.col(j).mean();
        f.col(j).array() -= mean;
        const double sd = std::sqrt(f.col(j).squaredNorm() / static_cast<double>(n));
        if (sd > 0.0) f.col(j) /= sd;
    }

    const Eigen::MatrixXd cov = f.transpose() * f / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw NumericError("compress: eigendecomposition failed");
    }

    // SelfAdjointEigenSolver sorts ascending; flip to descending
    Eigen::VectorXd lambda = eig.eigenvalues().reverse();
    Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
    lambda = lambda.cwiseMax(0.0);

    CompressedFeatures out;
    out.retained = rank_for_energy(lambda, energy_target);
    out.eigenvalues = lambda;
    out.basis = vectors.leftCols(out.retained);
    out.coords = f * out.basis;
    out.energy = lambda.head(out.retained).sum() / std::max(lambda.sum(), 1e-300);
    out.ids.reserve(features.size());
    for (const auto& fv : features) out.ids.push_back(fv.id);
    return out;
}

namespace {

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index i,
                        const Eigen::RowVectorXd& center) {
    return (points.row(i) - center).squaredNorm();
}

/// Lexicographic comparison of centroid rows.
bool row_less(const Eigen::MatrixXd& m, int a, int b) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (m(a, j) < m(b, j)) return true;
        if (m(a, j) > m(b, j)) return false;
    }
    return false;
}

} // namespace

ClusterResult kmeans_pp(const Eigen::MatrixXd& points, const std::vector<std::string>& ids, int k,
                        int max_iter, std::uint64_t seed) {
    const Eigen::Index n = points.rows();
    if (k < 1) {
        throw ConfigError("kmeans: K must be >= 1");
    }
    if (static_cast<Eigen::Index>(k) > n) {
        throw ConfigError("kmeans: K = " + std::to_string(k) + " exceeds the number of points " +
                          std::to_string(n));
    }
    if (max_iter < 1) {
        throw ConfigError("kmeans: max_iter must be >= 1");
    }
    if (ids.size() != static_cast<std::size_t>(n)) {
        throw ConfigError("kmeans: ids/points size mismatch");
    }

    Rng rng(seed);
    Eigen::MatrixXd centroids(k, points.cols());

    // k-means++ seeding: first centroid uniform, the rest by D^2 sampling
    centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.below(n)));
    Eigen::VectorXd d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int cc = 0; cc < c; ++cc) {
                best = std::min(best, squared_distance(points, i, centroids.row(cc)));
            }
            d2[i] = best;
            total += best;
        }
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
                pick = i; // falls through to the last point on rounding
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(n)); // all points identical
        }
        centroids.row(c) = points.row(pick);
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::vector<double> trace;
    int iterations = 0;
    for (; iterations < max_iter; ++iterations) {
        // assignment step
        bool changed = false;
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best_c = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = squared_distance(points, i, centroids.row(c));
                if (d < best_d) {
                    best_d = d;
                    best_c = c;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best_c) {
                labels[static_cast<std::size_t>(i)] = best_c;
                changed = true;
            }
            inertia += best_d;
        }
        trace.push_back(inertia);
        if (!changed) break;

        // update step
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
            ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centroids.row(c) =
                    sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                // re-seed an empty cluster at the point farthest from its
                // assigned centroid
                Eigen::Index farthest = 0;
                double worst = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double d = squared_distance(
                        points, i, centroids.row(labels[static_cast<std::size_t>(i)]));
                    if (d > worst) {
                        worst = d;
                        farthest = i;
                    }
                }
                centroids.row(c) = points.row(farthest);
            }
        }
    }

    // canonical relabeling: order clusters by centroid lexicographic order
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return row_less(centroids, a, b); });
    std::vector<int> remap(static_cast<std::size_t>(k));
    Eigen::MatrixXd sorted_centroids(k, points.cols());
    for (int c = 0; c < k; ++c) {
        remap[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])] = c;
        sorted_centroids.row(c) = centroids.row(order[static_cast<std::size_t>(c)]);
    }

    ClusterResult result;
    result.k = k;
    result.centroids = std::move(sorted_centroids);
    result.iterations = iterations + 1;
    result.inertia_trace = std::move(trace);
    result.inertia = result.inertia_trace.back();
    result.labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int c = remap[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        result.labels[static_cast<std::size_t>(i)] = c;
        result.assignment[ids[static_cast<std::size_t>(i)]] = c + 1;
    }
    return result;
}

double silhouette(const Eigen::MatrixXd& points, const std::vector<int>& labels, int k) {
    const Eigen::Index n = points.rows();
    if (k < 2) {
        throw ConfigError("silhouette: needs at least 2 clusters");
    }
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) {
        if (l < 0 || l >= k) throw ConfigError("silhouette: label out of range");
        ++counts[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw ConfigError("silhouette: cluster " + std::to_string(c + 1) + " is empty");
        }
    }

    double total = 0.0;
    std::vector<double> mean_dist(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            mean_dist[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] +=
                (points.row(i) - points.row(j)).norm();
        }
        const int own = labels[static_cast<std::size_t>(i)];
        const Eigen::Index own_count = counts[static_cast<std::size_t>(own)];
        // singleton clusters take a(i) = 0
        const double a = own_count > 1
                             ? mean_dist[static_cast<std::size_t>(own)] /
                                   static_cast<double>(own_count - 1)
                             : 0.0;
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own) continue;
            b = std::min(b, mean_dist[static_cast<std::size_t>(c)] /
                                static_cast<double>(counts[static_cast<std::size_t>(c)]));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    const double raw = total / static_cast<double>(n);
    return 0.5 * (raw + 1.0);
}

ClusterCountScan select_cluster_count(const Eigen::MatrixXd& points,
                                      const std::vector<std::string>& ids, int k_min, int k_max,
                                      int max_iter, std::uint64_t seed) {
    const Eigen::Index n = points.rows();
    if (k_min < 2 || static_cast<Eigen::Index>(k_max) > n - 1 || k_min > k_max) {
        throw ConfigError("cluster-count scan: range [" + std::to_string(k_min) + ", " +
                          std::to_string(k_max) + "] must lie within [2, n-1] = [2, " +
                          std::to_string(n - 1) + "]");
    }

    ClusterCountScan scan;
    double best_score = -1.0;
    for (int k = k_min; k <= k_max; ++k) {
        const ClusterResult result =
            kmeans_pp(points, ids, k, max_iter, seed + static_cast<std::uint64_t>(k));
        const double score = silhouette(points, result.labels, k);
        scan.scores[k] = score;
        if (score > best_score) { // strict: ties keep the smaller K
            best_score = score;
            scan.best_k = k;
        }
    }
    return scan;
}

CfcResult cfc(const Dataset& dataset, const CfcOptions& options) {
    CfcResult out;
    out.features.reserve(dataset.size());
    for (const auto& s : dataset.sequences()) {
        out.features.push_back(extract_features(s));
    }

    if (dataset.size() == 1) {
        // single sequence: one trivial cluster, no compression possible
        if (options.k.value_or(1) != 1) {
            throw ConfigError("cfc: a single sequence can only form K = 1 cluster");
        }
        ClusterResult single;
        single.k = 1;
        single.labels = {0};
        single.assignment[dataset.at(0).id()] = 1;
        single.centroids = Eigen::MatrixXd::Zero(1, 1);
        single.inertia = 0.0;
        single.iterations = 1;
        single.inertia_trace = {0.0};
        out.clusters = std::move(single);
        return out;
    }

    out.compressed = compress(out.features, options.energy_target);

    int k = 0;
    if (options.k) {
        k = *options.k;
    } else {
        const int k_max =
            std::min<int>(options.k_max, static_cast<int>(dataset.size()) - 1);
        const int k_min = std::min(options.k_min, k_max);
        out.scan = select_cluster_count(out.compressed.coords, out.compressed.ids, k_min, k_max,
                                        options.max_iter, options.seed);
        k = out.scan->best_k;
    }
    out.clusters = kmeans_pp(out.compressed.coords, out.compressed.ids, k, options.max_iter,
                             options.seed);
    return out;
}

} // namespace havok
