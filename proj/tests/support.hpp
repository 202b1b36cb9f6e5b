#pragma once

// Shared test helpers: reference samplers for distribution-recovery tests
// and small dataset builders. These stay on the test side so the library
// fits are checked against independently generated data.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "havok/rng.hpp"
#include "havok/signal.hpp"

namespace testsup {

/// Marsaglia-Tsang gamma sampler (shape a >= some small value, scale b).
inline double sample_gamma(havok::Rng& rng, double a, double b) {
    if (a < 1.0) {
        // boost with a uniform power
        const double u = rng.uniform();
        return sample_gamma(rng, a + 1.0, b) * std::pow(u, 1.0 / a);
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x = rng.normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * b;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * b;
    }
}

/// GEV quantile sampler in the k-positive-is-heavy-tailed convention.
inline double sample_gev(havok::Rng& rng, double k, double mu, double sigma) {
    double u = rng.uniform();
    while (u <= 0.0 || u >= 1.0) u = rng.uniform();
    if (std::abs(k) < 1e-12) {
        return mu - sigma * std::log(-std::log(u));
    }
    return mu + sigma * (std::pow(-std::log(u), -k) - 1.0) / k;
}

/// Location-scale Student t via normal / sqrt(chi^2 / nu).
inline double sample_student_t(havok::Rng& rng, double mu, double sigma, double nu) {
    const double z = rng.normal();
    const double chi2 = sample_gamma(rng, 0.5 * nu, 2.0);
    return mu + sigma * z / std::sqrt(chi2 / nu);
}

/// Well-separated Gaussian blobs; returns points stacked by blob.
inline Eigen::MatrixXd make_blobs(havok::Rng& rng, const std::vector<Eigen::Vector2d>& centers,
                                  int per_blob, double sigma, std::vector<int>* labels = nullptr) {
    Eigen::MatrixXd points(static_cast<Eigen::Index>(centers.size()) * per_blob, 2);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (int i = 0; i < per_blob; ++i, ++row) {
            points(row, 0) = centers[c][0] + sigma * rng.normal();
            points(row, 1) = centers[c][1] + sigma * rng.normal();
            if (labels) labels->push_back(static_cast<int>(c));
        }
    }
    return points;
}

inline std::vector<std::string> index_ids(std::size_t n) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = "p" + std::to_string(i);
    return ids;
}

/// 30-sequence corpus from three distinct generators, the clustering
/// recovery fixture: labels are 0 = low sine, 1 = high sine, 2 = chirp.
inline havok::Dataset three_family_corpus(std::vector<int>* labels = nullptr);

} // namespace testsup

#include "havok/synthetic.hpp"

namespace testsup {

inline havok::Dataset three_family_corpus(std::vector<int>* labels) {
    std::vector<havok::Sequence> sequences;
    for (int i = 0; i < 10; ++i) {
        havok::GeneratorSpec spec;
        spec.kind = havok::SignalKind::noisy_sine;
        spec.dt = 0.01;
        spec.n_samples = 1200;
        spec.frequency = 0.4 + 0.01 * i;
        spec.amplitude = 1.0 + 0.02 * i;
        spec.noise_sigma = 0.05;
        spec.seed = 100 + static_cast<std::uint64_t>(i);
        spec.id = "low_" + std::to_string(i);
        sequences.push_back(havok::generate(spec));
        if (labels) labels->push_back(0);
    }
    for (int i = 0; i < 10; ++i) {
        havok::GeneratorSpec spec;
        spec.kind = havok::SignalKind::noisy_sine;
        spec.dt = 0.01;
        spec.n_samples = 1200;
        spec.frequency = 8.0 + 0.05 * i;
        spec.amplitude = 0.9 + 0.02 * i;
        spec.noise_sigma = 0.05;
        spec.seed = 200 + static_cast<std::uint64_t>(i);
        spec.id = "high_" + std::to_string(i);
        sequences.push_back(havok::generate(spec));
        if (labels) labels->push_back(1);
    }
    for (int i = 0; i < 10; ++i) {
        havok::GeneratorSpec spec;
        spec.kind = havok::SignalKind::chirp;
        spec.dt = 0.01;
        spec.n_samples = 1200;
        spec.frequency = 1.0 + 0.02 * i;
        spec.frequency_end = 25.0 + 0.2 * i;
        spec.amplitude = 1.1;
        spec.phase = 0.1 * i;
        spec.id = "chirp_" + std::to_string(i);
        sequences.push_back(havok::generate(spec));
        if (labels) labels->push_back(2);
    }
    return havok::Dataset(std::move(sequences));
}

/// Best label agreement over all permutations of 3 cluster indices.
inline double label_agreement_3(const std::vector<int>& truth, const std::vector<int>& found) {
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    double best = 0.0;
    for (const auto& perm : perms) {
        int hits = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (perm[found[i]] == truth[i]) ++hits;
        }
        best = std::max(best, static_cast<double>(hits) / static_cast<double>(truth.size()));
    }
    return best;
}

} // namespace testsup
