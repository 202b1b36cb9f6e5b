#include "havok/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "havok/errors.hpp"

namespace havok {

SvdFactors svd(const HankelMatrix& x) {
    if (!x.data.allFinite()) {
        throw DataError("svd: matrix contains non-finite entries");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> solver(x.data, Eigen::ComputeThinU | Eigen::ComputeThinV);

    SvdFactors f;
    f.u = solver.matrixU();
    f.s = solver.singularValues();
    f.v = solver.matrixV();

    // sign convention: largest-magnitude entry of each left vector positive
    for (Eigen::Index j = 0; j < f.u.cols(); ++j) {
        Eigen::Index idx = 0;
        f.u.col(j).cwiseAbs().maxCoeff(&idx);
        if (f.u(idx, j) < 0.0) {
            f.u.col(j) = -f.u.col(j);
            f.v.col(j) = -f.v.col(j);
        }
    }
    return f;
}

int truncation_rank(const Eigen::VectorXd& s, const RankPolicy& policy, Eigen::Index rows,
                    Eigen::Index cols) {
    if (s.size() == 0) {
        throw ConfigError("truncation_rank: empty spectrum");
    }
    const int k = static_cast<int>(s.size());
    int r = 0;
    switch (policy.kind) {
        case RankPolicy::Kind::manual:
            r = std::min(policy.rank, k);
            break;
        case RankPolicy::Kind::energy: {
            if (!(policy.energy > 0.0) || policy.energy > 1.0) {
                throw ConfigError("truncation_rank: energy fraction must lie in (0, 1]");
            }
            const Eigen::VectorXd sq = s.array().square();
            const double total = sq.sum();
            double acc = 0.0;
            r = k;
            for (int i = 0; i < k; ++i) {
                acc += sq[i];
                if (acc / total >= policy.energy) {
                    r = i + 1;
                    break;
                }
            }
            break;
        }
        case RankPolicy::Kind::hard_threshold: {
            // Gavish-Donoho optimal hard threshold for unknown noise:
            // omega(beta) ~= 0.56 b^3 - 0.95 b^2 + 1.82 b + 1.43, applied to
            // the median singular value.
            const double m = static_cast<double>(std::min(rows, cols));
            const double n = static_cast<double>(std::max(rows, cols));
            const double beta = m / n;
            const double omega = 0.56 * beta * beta * beta - 0.95 * beta * beta + 1.82 * beta +
                                 1.43;
            Eigen::VectorXd sorted = s;
            std::sort(sorted.data(), sorted.data() + sorted.size());
            const double median = sorted.size() % 2 == 1
                                      ? sorted[sorted.size() / 2]
                                      : 0.5 * (sorted[sorted.size() / 2 - 1] +
                                               sorted[sorted.size() / 2]);
            const double cutoff = omega * median;
            r = 0;
            for (int i = 0; i < k; ++i) {
                if (s[i] > cutoff) ++r;
            }
            break;
        }
    }
    if (r < 2) {
        throw ConfigError("truncation_rank: resolved rank " + std::to_string(r) +
                          " is below 2; the forced model needs a linear part and a forcing "
                          "coordinate");
    }
    return r;
}

Eigen::MatrixXd differentiate(const Eigen::MatrixXd& v, double dt) {
    const Eigen::Index n = v.rows();
    if (n < 5) {
        throw DataError("differentiate: need at least 5 rows, got " + std::to_string(n));
    }
    if (!(dt > 0.0)) {
        throw ConfigError("differentiate: dt must be positive");
    }
    Eigen::MatrixXd out(n - 4, v.cols());
    const double scale = 1.0 / (12.0 * dt);
    for (Eigen::Index i = 2; i < n - 2; ++i) {
        out.row(i - 2) =
            (-v.row(i + 2) + 8.0 * v.row(i + 1) - 8.0 * v.row(i - 1) + v.row(i - 2)) * scale;
    }
    return out;
}

Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& g, const Eigen::MatrixXd& y, double lambda) {
    if (lambda < 0.0) {
        throw ConfigError("ridge: lambda must be >= 0");
    }
    if (g.rows() != y.rows()) {
        throw ConfigError("ridge: G and y row counts differ");
    }
    const Eigen::Index p = g.cols();
    Eigen::MatrixXd gram = g.transpose() * g;
    gram.diagonal().array() += lambda;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) {
        throw NumericError("ridge: factorization of the normal equations failed");
    }
    if (lambda == 0.0) {
        const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
        const double dmax = d.maxCoeff();
        if (dmax <= 0.0 ||
            d.minCoeff() < dmax * static_cast<double>(p) *
                               std::numeric_limits<double>::epsilon()) {
            throw NumericError(
                "ridge: G^T G is singular at lambda = 0; use lambda > 0 to regularize");
        }
    }
    return ldlt.solve(g.transpose() * y);
}

SparseFit sequential_threshold_ridge(const Eigen::MatrixXd& g, const Eigen::VectorXd& y,
                                     double lambda, double eps) {
    if (!(eps > 0.0)) {
        throw ConfigError("sequential threshold: eps must be > 0");
    }
    const Eigen::Index p = g.cols();
    std::vector<int> active(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) active[static_cast<std::size_t>(i)] = static_cast<int>(i);

    SparseFit fit;
    Eigen::VectorXd coeffs;
    while (true) {
        ++fit.iterations;
        Eigen::MatrixXd g_active(g.rows(), static_cast<Eigen::Index>(active.size()));
        for (std::size_t j = 0; j < active.size(); ++j) {
            g_active.col(static_cast<Eigen::Index>(j)) = g.col(active[j]);
        }
        coeffs = ridge_solve(g_active, y, lambda);

        // |alpha_i| comparison: the magnitude is what marks a term inactive
        std::vector<int> survivors;
        survivors.reserve(active.size());
        for (std::size_t j = 0; j < active.size(); ++j) {
            if (std::abs(coeffs[static_cast<Eigen::Index>(j)]) >= eps) {
                survivors.push_back(active[j]);
            }
        }
        if (survivors.empty()) {
            throw NumericError("sequential threshold: every coefficient fell below eps = " +
                               format_double(eps) + "; the model is empty");
        }
        if (survivors.size() == active.size()) break; // active set stable
        active = std::move(survivors);
    }

    fit.coefficients = Eigen::VectorXd::Zero(p);
    for (std::size_t j = 0; j < active.size(); ++j) {
        fit.coefficients[active[j]] = coeffs[static_cast<Eigen::Index>(j)];
    }
    fit.active = std::move(active);
    return fit;
}

HavokFit fit_havok(const Sequence& x, EmbeddingConfig embedding, const RankPolicy& rank_policy,
                   double lambda, double eps) {
    const HankelMatrix h = embed(x, embedding);
    const SvdFactors factors = svd(h);
    const int r = truncation_rank(factors.s, rank_policy, h.data.rows(), h.data.cols());

    const Eigen::MatrixXd v_r = factors.v.leftCols(r);
    const Eigen::MatrixXd dv = differentiate(v_r, x.dt());
    // drop the same boundary rows from the predictors so shapes align
    const Eigen::MatrixXd g = v_r.middleRows(2, v_r.rows() - 4);

    // each of the first r-1 coordinates gets its own dynamics equation;
    // the r-th coordinate is the forcing and is not modeled
    Eigen::MatrixXd coeffs(r - 1, r);
    for (int j = 0; j < r - 1; ++j) {
        const SparseFit fit = sequential_threshold_ridge(g, dv.col(j), lambda, eps);
        coeffs.row(j) = fit.coefficients.transpose();
    }

    HavokFit out;
    out.model.rank = r;
    out.model.linear = coeffs.leftCols(r - 1);
    out.model.forcing = coeffs.col(r - 1);
    out.model.u_r = factors.u.leftCols(r);
    out.model.s_r = factors.s.head(r);
    out.model.embedding = embedding;
    out.model.dt = x.dt();
    out.model.ridge_lambda = lambda;
    out.model.threshold = eps;
    out.v = v_r;
    out.singular_values = factors.s;
    return out;
}

Eigen::MatrixXd project_coordinates(const HavokModel& model, const Sequence& x) {
    const HankelMatrix h = embed(x, model.embedding);
    if (h.data.rows() != model.u_r.rows()) {
        throw ConfigError("project: embedding dimension does not match the model");
    }
    // v(t) = S_r^-1 U_r^T chi_t, one row per Hankel column
    return (model.s_r.cwiseInverse().asDiagonal() * (model.u_r.transpose() * h.data)).transpose();
}

} // namespace havok
