#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "havok/errors.hpp"
#include "havok/features.hpp"
#include "havok/rng.hpp"
#include "havok/synthetic.hpp"
#include "support.hpp"

using namespace havok;

namespace {

std::vector<FeatureVector> feature_rows(const Eigen::MatrixXd& raw) {
    std::vector<FeatureVector> out;
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        FeatureVector fv;
        fv.id = "p" + std::to_string(i);
        for (int j = 0; j < kFeatureCount; ++j) fv.f[static_cast<std::size_t>(j)] = raw(i, j);
        out.push_back(fv);
    }
    return out;
}

} // namespace

TEST_CASE("sinusoid features match the analytic values") {
    GeneratorSpec spec;
    spec.kind = SignalKind::sine;
    spec.frequency = 0.5;
    spec.dt = 0.01;
    spec.n_samples = 10000;
    const FeatureVector fv = extract_features(generate(spec));

    CHECK(std::abs(fv.f[0]) < 1e-6);                       // mean
    CHECK(fv.f[1] == doctest::Approx(M_SQRT1_2).epsilon(1e-3));  // std of unit sine
    CHECK(std::abs(fv.f[2]) < 1e-2);                       // skewness
    CHECK(fv.f[3] == doctest::Approx(-1.5).epsilon(1e-2)); // sine excess kurtosis
    CHECK(fv.f[4] == doctest::Approx(std::cos(2.0 * M_PI * 0.5 * 0.01)).epsilon(1e-4));
    CHECK(fv.f[5] == doctest::Approx(0.5).epsilon(0.02));  // dominant frequency
    CHECK(fv.f[7] == doctest::Approx(1.0).epsilon(0.02));  // crossings per second
    CHECK(fv.f[8] == doctest::Approx(2.0).epsilon(1e-3));  // peak to peak
    CHECK(fv.f[9] == doctest::Approx(M_SQRT1_2).epsilon(1e-3)); // rms
}

TEST_CASE("white-noise features match known moments") {
    Rng rng(42);
    std::vector<double> values(100000);
    for (auto& v : values) v = rng.normal();
    const FeatureVector fv = extract_features(Sequence(values, 0.01, {"wn", {}}));
    CHECK(std::abs(fv.f[2]) < 0.05); // skewness ~ 0
    CHECK(std::abs(fv.f[3]) < 0.1);  // excess kurtosis ~ 0
    CHECK(fv.f[6] > 0.9);            // near-flat spectrum -> entropy near 1
}

TEST_CASE("constant sequence is rejected") {
    CHECK_THROWS_AS(extract_features(Sequence({2.0, 2.0, 2.0, 2.0}, 0.1, {"flat", {}})),
                    DataError);
}

TEST_CASE("rank_for_energy on a spectrum whose fourth ratio is 0.902") {
    Eigen::VectorXd lambda(10);
    lambda << 6.2, 1.6, 0.86, 0.36, 0.3, 0.2, 0.15, 0.13, 0.11, 0.09;
    CHECK(lambda.sum() == doctest::Approx(10.0));
    CHECK(rank_for_energy(lambda, 0.901) == 4);
    CHECK(rank_for_energy(lambda, 1.0) == 10);
    CHECK(rank_for_energy(lambda, 0.5) == 1);
    CHECK_THROWS_AS(rank_for_energy(lambda, 0.0), ConfigError);
    CHECK_THROWS_AS(rank_for_energy(lambda, 1.5), ConfigError);
}

TEST_CASE("compress recovers a planted rank-2 structure") {
    Rng rng(7);
    Eigen::VectorXd u(kFeatureCount), w(kFeatureCount);
    for (int j = 0; j < kFeatureCount; ++j) {
        u[j] = rng.normal();
        w[j] = rng.normal();
    }
    const int n = 40;
    Eigen::MatrixXd raw(n, kFeatureCount);
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
        for (int j = 0; j < kFeatureCount; ++j) {
            raw(i, j) = a * u[j] + b * w[j] + 1e-8 * rng.normal();
        }
    }
    const CompressedFeatures cf = compress(feature_rows(raw), 0.99);
    CHECK(cf.retained == 2);
    CHECK(cf.energy > 0.99);
}

TEST_CASE("full-energy compression preserves pairwise distances") {
    Rng rng(11);
    const int n = 30;
    Eigen::MatrixXd raw(n, kFeatureCount);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < kFeatureCount; ++j) raw(i, j) = rng.uniform(-5.0, 5.0);
    }
    const auto rows = feature_rows(raw);
    const CompressedFeatures cf = compress(rows, 1.0);

    // standardize columns the same way to get the reference geometry
    Eigen::MatrixXd f = raw;
    for (int j = 0; j < kFeatureCount; ++j) {
        const double mean = f.col(j).mean();
        f.col(j).array() -= mean;
        const double sd = std::sqrt(f.col(j).squaredNorm() / n);
        if (sd > 0.0) f.col(j) /= sd;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double before = (f.row(i) - f.row(j)).norm();
            const double after = (cf.coords.row(i) - cf.coords.row(j)).norm();
            CHECK(std::abs(before - after) < 1e-10);
        }
    }

    // basis orthonormal to 1e-10
    const Eigen::MatrixXd gram = cf.basis.transpose() * cf.basis;
    CHECK((gram - Eigen::MatrixXd::Identity(cf.retained, cf.retained)).cwiseAbs().maxCoeff() <
          1e-10);
}

TEST_CASE("kmeans on two points separates them perfectly") {
    Eigen::MatrixXd points(2, 2);
    points << 0.0, 0.0, 10.0, 10.0;
    const ClusterResult result = kmeans_pp(points, {"a", "b"}, 2, 100, 3);
    CHECK(result.inertia == doctest::Approx(0.0));
    CHECK(result.assignment.at("a") != result.assignment.at("b"));
}

TEST_CASE("kmeans with K=1 returns the centroid and total deviation") {
    Rng rng(5);
    Eigen::MatrixXd points(50, 3);
    for (Eigen::Index i = 0; i < 50; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) points(i, j) = rng.normal();
    }
    const ClusterResult result = kmeans_pp(points, testsup::index_ids(50), 1, 100, 0);
    const Eigen::RowVectorXd mean = points.colwise().mean();
    CHECK((result.centroids.row(0) - mean).norm() < 1e-12);
    double expected = 0.0;
    for (Eigen::Index i = 0; i < 50; ++i) expected += (points.row(i) - mean).squaredNorm();
    CHECK(result.inertia == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kmeans recovers three separated blobs") {
    Rng rng(21);
    std::vector<int> truth;
    const Eigen::MatrixXd points = testsup::make_blobs(
        rng, {{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}}, 20, 0.1, &truth);
    const ClusterResult result = kmeans_pp(points, testsup::index_ids(60), 3, 1000, 17);
    CHECK(testsup::label_agreement_3(truth, result.labels) == doctest::Approx(1.0));

    // inertia never increases across Lloyd iterations
    for (std::size_t i = 1; i < result.inertia_trace.size(); ++i) {
        CHECK(result.inertia_trace[i] <= result.inertia_trace[i - 1] + 1e-12);
    }
}

TEST_CASE("kmeans partition is stable under input permutation") {
    Rng rng(33);
    std::vector<int> truth;
    const Eigen::MatrixXd points = testsup::make_blobs(
        rng, {{0.0, 0.0}, {8.0, 8.0}, {-8.0, 8.0}}, 15, 0.05, &truth);
    const auto ids = testsup::index_ids(45);
    const ClusterResult direct = kmeans_pp(points, ids, 3, 1000, 5);

    // reverse the point order
    Eigen::MatrixXd reversed(points.rows(), points.cols());
    std::vector<std::string> reversed_ids(ids.rbegin(), ids.rend());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        reversed.row(i) = points.row(points.rows() - 1 - i);
    }
    const ClusterResult flipped = kmeans_pp(reversed, reversed_ids, 3, 1000, 5);

    // canonical relabeling by centroid order makes assignments comparable
    for (const auto& [id, cluster] : direct.assignment) {
        CHECK(flipped.assignment.at(id) == cluster);
    }
}

TEST_CASE("kmeans rejects K > n and bad parameters") {
    Eigen::MatrixXd points(2, 1);
    points << 0.0, 1.0;
    CHECK_THROWS_AS(kmeans_pp(points, {"a", "b"}, 3, 10, 0), ConfigError);
    CHECK_THROWS_AS(kmeans_pp(points, {"a", "b"}, 0, 10, 0), ConfigError);
}

TEST_CASE("silhouette of separated singletons is 1") {
    Eigen::MatrixXd points(2, 2);
    points << 0.0, 0.0, 100.0, 100.0;
    CHECK(silhouette(points, {0, 1}, 2) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("silhouette of identical points is the degenerate 0.5") {
    Eigen::MatrixXd points = Eigen::MatrixXd::Zero(6, 2);
    CHECK(silhouette(points, {0, 1, 0, 1, 0, 1}, 2) == doctest::Approx(0.5));
}

TEST_CASE("silhouette on structureless uniform points lands near 0.5") {
    Rng rng(101);
    Eigen::MatrixXd points(200, 8);
    for (Eigen::Index i = 0; i < 200; ++i) {
        for (Eigen::Index j = 0; j < 8; ++j) points(i, j) = rng.uniform();
    }
    const ClusterResult result = kmeans_pp(points, testsup::index_ids(200), 2, 1000, 9);
    const double s = silhouette(points, result.labels, 2);
    CHECK(s > 0.4);
    CHECK(s < 0.65);
}

TEST_CASE("silhouette decreases when two true clusters are merged") {
    Rng rng(55);
    std::vector<int> truth;
    const Eigen::MatrixXd points = testsup::make_blobs(
        rng, {{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}}, 15, 0.2, &truth);
    std::vector<int> merged = truth;
    for (int& l : merged) {
        if (l == 2) l = 1; // merge blobs 2 and 3
    }
    CHECK(silhouette(points, truth, 3) > silhouette(points, merged, 2));
}

TEST_CASE("silhouette rejects K=1 and empty clusters") {
    Eigen::MatrixXd points(3, 1);
    points << 0.0, 1.0, 2.0;
    CHECK_THROWS_AS(silhouette(points, {0, 0, 0}, 1), ConfigError);
    CHECK_THROWS_AS(silhouette(points, {0, 0, 0}, 2), ConfigError);
}

TEST_CASE("cluster-count scan finds the planted count") {
    Rng rng(77);
    const Eigen::MatrixXd three = testsup::make_blobs(
        rng, {{0.0, 0.0}, {12.0, 0.0}, {0.0, 12.0}}, 12, 0.2, nullptr);
    const auto scan3 = select_cluster_count(three, testsup::index_ids(36), 2, 10, 1000, 1);
    CHECK(scan3.best_k == 3);

    const Eigen::MatrixXd two =
        testsup::make_blobs(rng, {{0.0, 0.0}, {15.0, 15.0}}, 20, 0.3, nullptr);
    const auto scan2 = select_cluster_count(two, testsup::index_ids(40), 2, 5, 1000, 1);
    CHECK(scan2.best_k == 2);
}

TEST_CASE("cfc on a single sequence returns one trivial cluster") {
    GeneratorSpec spec;
    spec.kind = SignalKind::sine;
    spec.id = "only";
    const Dataset ds({generate(spec)});
    CfcOptions options;
    options.k = 1;
    const CfcResult result = cfc(ds, options);
    CHECK(result.clusters.k == 1);
    CHECK(result.clusters.assignment.at("only") == 1);
}

TEST_CASE("cfc recovers the three generator families") {
    std::vector<int> truth;
    const Dataset corpus = testsup::three_family_corpus(&truth);

    CfcOptions fixed;
    fixed.k = 3;
    fixed.seed = 4;
    const CfcResult with_k = cfc(corpus, fixed);
    std::vector<int> found;
    for (const auto& s : corpus.sequences()) {
        found.push_back(with_k.clusters.assignment.at(s.id()) - 1);
    }
    CHECK(testsup::label_agreement_3(truth, found) >= 0.95);

    CfcOptions automatic;
    automatic.seed = 4;
    automatic.k_max = 10;
    const CfcResult with_auto = cfc(corpus, automatic);
    CHECK(with_auto.clusters.k == 3);
    CHECK(with_auto.scan.has_value());
}
