#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "havok/signal.hpp"

namespace havok {

inline constexpr int kFeatureCount = 10;

/// Fixed feature list, frozen for reproducibility. Order matters: it is
/// the column order of every feature matrix and of features.csv.
///   0 mean
///   1 standard deviation (population)
///   2 skewness
///   3 excess kurtosis
///   4 lag-1 autocorrelation
///   5 dominant frequency in Hz (periodogram argmax over positive bins,
///     mean removed first)
///   6 spectral entropy, normalized to [0,1]
///   7 zero-crossing rate in crossings per second
///   8 peak-to-peak amplitude
///   9 root mean square
const std::array<std::string_view, kFeatureCount>& feature_names();

struct FeatureVector {
    std::array<double, kFeatureCount> f{};
    std::string id;
};

/// Compute the 10 features on the raw (non-standardized) sequence.
/// Throws DataError for constant input.
FeatureVector extract_features(const Sequence& s);

/// POD compression of a batch of feature vectors. Rows of `coords` are
/// per-sequence latent coordinates z; `basis` columns are the retained
/// eigenvectors of the column-standardized feature covariance.
struct CompressedFeatures {
    Eigen::MatrixXd coords;      ///< n x r_f
    Eigen::MatrixXd basis;       ///< 10 x r_f, orthonormal columns
    Eigen::VectorXd eigenvalues; ///< all 10, descending, clamped at 0
    int retained = 0;            ///< r_f
    double energy = 0.0;         ///< cumulative variance ratio at r_f
    std::vector<std::string> ids;
};

/// Smallest r whose cumulative eigenvalue ratio reaches `target`.
/// `eigenvalues` must be sorted descending and non-negative.
int rank_for_energy(const Eigen::VectorXd& eigenvalues, double target);

/// Column-standardize the feature matrix, eigendecompose its population
/// covariance and keep the smallest basis reaching `energy_target`.
/// Zero-variance feature columns are left at zero (they carry no
/// information to compress). Throws ConfigError for a target outside (0,1].
CompressedFeatures compress(const std::vector<FeatureVector>& features, double energy_target);

struct ClusterResult {
    std::map<std::string, int> assignment; ///< id -> cluster index in 1..K
    std::vector<int> labels;               ///< 0-based, aligned with the input point rows
    Eigen::MatrixXd centroids;             ///< K x dim, lexicographically sorted rows
    double inertia = 0.0;
    int iterations = 0;
    int k = 0;
    std::vector<double> inertia_trace; ///< inertia after each Lloyd iteration
};

/// k-means++ seeding (D^2 sampling) followed by Lloyd iterations with
/// Euclidean distance. Deterministic for a fixed seed. Empty clusters are
/// re-seeded at the point farthest from its assigned centroid. Labels are
/// canonicalized by sorting centroids lexicographically.
ClusterResult kmeans_pp(const Eigen::MatrixXd& points, const std::vector<std::string>& ids, int k,
                        int max_iter, std::uint64_t seed);

/// Mean silhouette over all points, affinely mapped from [-1,1] to [0,1].
/// Singleton clusters use a(i)=0; a point with a(i)=b(i)=0 scores raw 0.
/// Throws ConfigError for k < 2 or an empty cluster.
double silhouette(const Eigen::MatrixXd& points, const std::vector<int>& labels, int k);

struct ClusterCountScan {
    int best_k = 0;
    std::map<int, double> scores; ///< K -> normalized silhouette
};

/// Run kmeans_pp for each K in [k_min, k_max] (seed + K per run) and pick
/// the K with the best normalized silhouette; ties go to the smaller K.
ClusterCountScan select_cluster_count(const Eigen::MatrixXd& points,
                                      const std::vector<std::string>& ids, int k_min, int k_max,
                                      int max_iter, std::uint64_t seed);

struct CfcOptions {
    std::optional<int> k;  ///< empty = choose K by silhouette scan
    int k_min = 2;
    int k_max = 10;
    double energy_target = 0.90;
    int max_iter = 1000;
    std::uint64_t seed = 0;
};

struct CfcResult {
    std::vector<FeatureVector> features;
    CompressedFeatures compressed;
    ClusterResult clusters;
    std::optional<ClusterCountScan> scan; ///< present when K was chosen automatically
};

/// Compressed-features clustering: extract features per sequence,
/// standardize columns, POD-compress, then cluster in the latent space.
CfcResult cfc(const Dataset& dataset, const CfcOptions& options);

} // namespace havok
