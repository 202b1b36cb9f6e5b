#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "havok/signal.hpp"

namespace havok {

struct EmbeddingConfig {
    int tau = 1; ///< delay step in samples, >= 1
    int dim = 2; ///< embedding dimension d, >= 1
};

/// Delay-embedded matrix: column t is [x_t, x_{t+tau}, ..., x_{t+(d-1)tau}].
struct HankelMatrix {
    Eigen::MatrixXd data; ///< dim x n_t
    EmbeddingConfig config;

    Eigen::Index n_t() const noexcept { return data.cols(); }
};

/// Average mutual information (nats) between x_t and x_{t+tau}, with
/// probabilities estimated by `bins`-cell histograms over [min,max] of
/// each marginal series. tau = 0 returns the marginal entropy H(X).
double ami(const Sequence& x, int tau, int bins = 16);

struct DelayScan {
    int tau = 0;
    std::vector<double> curve;       ///< curve[i] = AMI at tau = i+1
    bool local_minimum_found = true; ///< false when the global argmin fallback fired
};

/// First strict local minimum of the AMI curve over tau = 1..tau_max
/// (the tau=0 self-information anchors the left edge). Falls back to the
/// global argmin when no interior minimum exists.
DelayScan select_delay(const Sequence& x, int tau_max = 20, int bins = 16);

/// Kennel-style false-nearest-neighbor percentage at embedding dimension d.
/// A neighbor is false when the (d+1)-th coordinate gap exceeds r_tol
/// times the d-dimensional distance, or the expanded distance exceeds
/// a_tol times the series standard deviation.
double fnn_percentage(const Sequence& x, int tau, int d, double r_tol = 10.0, double a_tol = 2.0);

struct DimensionScan {
    int dim = 0;
    std::vector<double> curve; ///< curve[i] = FNN percentage at d = i+1
    bool drop_found = true;    ///< false when the percentage never fell enough
    std::optional<int> rise_index; ///< first d past the minimum where the curve rises
};

/// Smallest d whose FNN percentage drops to <= drop_threshold_pct percent
/// of the d = 1 value. The sweep stops once the criterion is met; when it
/// never is, dim = d_max and drop_found = false.
DimensionScan select_dimension(const Sequence& x, int tau, int d_max = 50,
                               double drop_threshold_pct = 10.0, double r_tol = 10.0,
                               double a_tol = 2.0);

/// Build the delay-embedded Hankel matrix; n_t = len - (d-1)*tau columns.
HankelMatrix embed(const Sequence& x, EmbeddingConfig config);

} // namespace havok
