#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "havok/embedding.hpp"
#include "havok/signal.hpp"

namespace havok {

/// Thin SVD factors of a Hankel matrix, sign-fixed so the largest-magnitude
/// entry of each left singular vector is positive.
struct SvdFactors {
    Eigen::MatrixXd u; ///< d x k
    Eigen::VectorXd s; ///< k, non-increasing
    Eigen::MatrixXd v; ///< n_t x k
};

SvdFactors svd(const HankelMatrix& x);

/// Truncation-rank selection policy.
struct RankPolicy {
    enum class Kind { manual, energy, hard_threshold };
    Kind kind = Kind::manual;
    int rank = 2;        ///< manual
    double energy = 0.9; ///< energy

    static RankPolicy manual(int r) { return {Kind::manual, r, 0.0}; }
    static RankPolicy energy_fraction(double eta) { return {Kind::energy, 0, eta}; }
    static RankPolicy hard_threshold() { return {Kind::hard_threshold, 0, 0.0}; }
};

/// Resolve the policy against a singular-value spectrum. `rows`/`cols` give
/// the matrix shape for the hard-threshold rule (Gavish-Donoho optimal
/// threshold with median-based noise estimate). Throws ConfigError when
/// the resolved rank falls below 2, since the forced model needs at least
/// one linear coordinate plus the forcing coordinate.
int truncation_rank(const Eigen::VectorXd& s, const RankPolicy& policy, Eigen::Index rows,
                    Eigen::Index cols);

/// Fourth-order central differences along each column; the two rows at
/// each end are dropped, so the result has n_t - 4 rows.
Eigen::MatrixXd differentiate(const Eigen::MatrixXd& v, double dt);

/// Ridge solution (G^T G + lambda I)^-1 G^T y via LDLT of the regularized
/// normal equations. lambda = 0 requires G^T G to be invertible and throws
/// NumericError otherwise.
Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& g, const Eigen::MatrixXd& y, double lambda);

struct SparseFit {
    Eigen::VectorXd coefficients; ///< full length, pruned entries exactly 0
    std::vector<int> active;      ///< surviving column indices, ascending
    int iterations = 0;
};

/// Sequentially thresholded ridge regression: solve, zero every
/// coefficient with |alpha_i| < eps, refit on the survivors, and repeat
/// until the active set is stable. Throws NumericError when everything
/// is thresholded away.
SparseFit sequential_threshold_ridge(const Eigen::MatrixXd& g, const Eigen::VectorXd& y,
                                     double lambda, double eps);

/// Forced linear model in delay-SVD coordinates:
///   dv/dt = linear * v + forcing * v_r
/// over the first r-1 coordinates, with the r-th coordinate acting as the
/// measured forcing signal.
struct HavokModel {
    int rank = 0;
    Eigen::MatrixXd linear;  ///< (r-1) x (r-1)
    Eigen::VectorXd forcing; ///< r-1
    Eigen::MatrixXd u_r;     ///< d x r
    Eigen::VectorXd s_r;     ///< r
    EmbeddingConfig embedding;
    double dt = 0.0;
    double ridge_lambda = 0.0;
    double threshold = 0.0;
};

struct HavokFit {
    HavokModel model;
    Eigen::MatrixXd v;               ///< training trajectory, n_t x r
    Eigen::VectorXd singular_values; ///< full spectrum for diagnostics
};

/// Embed, decompose, differentiate and regress: the full identification
/// pass producing the forced linear model.
HavokFit fit_havok(const Sequence& x, EmbeddingConfig embedding, const RankPolicy& rank_policy,
                   double lambda = 1e-2, double eps = 1e-6);

/// Project a signal onto the model's delay-SVD coordinates:
/// rows are v(t) = S_r^-1 U_r^T chi_t for each Hankel column of x.
Eigen::MatrixXd project_coordinates(const HavokModel& model, const Sequence& x);

} // namespace havok
