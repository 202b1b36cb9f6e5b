#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "havok/regression.hpp"

namespace havok {

enum class ForcingMode { measured, zero, held };

ForcingMode forcing_mode_from_string(const std::string& name);
std::string to_string(ForcingMode mode);

struct ForecastResult {
    Eigen::MatrixXd v_traj;           ///< steps x (r-1) linear coordinates
    std::vector<double> x_hat;        ///< reconstructed scalar series, length = horizon
    std::vector<double> forcing_used; ///< the u_k actually applied, length = horizon
    ForcingMode mode = ForcingMode::measured;
    int horizon = 0;
};

/// Integrate dv/dt = A v + B u(t) with classical RK4 at the model's dt,
/// holding the forcing constant over each step. `forcing` supplies the
/// measured samples (mode = measured needs length >= steps; mode = held
/// repeats its last sample; mode = zero ignores it). Row k of the
/// trajectory is the state at t0 + k dt, starting at v0.
ForecastResult simulate(const HavokModel& model, const Eigen::VectorXd& v0,
                        std::span<const double> forcing, ForcingMode mode, int steps);

/// Map a trajectory of delay-SVD coordinates back to the scalar signal:
/// x_hat(t) = first row of U_r S_r v(t)^T. Accepts r columns (full
/// truncated state) or r-1 columns (forcing coordinate taken as zero).
std::vector<double> reconstruct(const HavokModel& model, const Eigen::MatrixXd& v_traj);

/// Closed index interval [first, last].
struct IndexInterval {
    std::size_t first = 0;
    std::size_t last = 0;
};

/// Maximal runs where |v_r| exceeds the threshold; runs separated by a
/// gap smaller than merge_gap samples are merged.
std::vector<IndexInterval> forcing_active(std::span<const double> v_r, double eps_force = 0.045,
                                          std::size_t merge_gap = 0);

/// Per-instant error statistics across an ensemble: RMSE, MAE, and VAE
/// (population variance of the absolute errors).
struct ErrorEvolution {
    std::vector<double> rmse;
    std::vector<double> mae;
    std::vector<double> vae;
};

ErrorEvolution error_evolution(const std::vector<std::vector<double>>& predictions,
                               const std::vector<std::vector<double>>& truths);

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, int bins);

/// Magnitude scalogram of the analytic Morlet continuous wavelet
/// transform, one row per requested frequency (Hz), computed by
/// frequency-domain convolution on the zero-padded signal. Frequencies
/// must be positive and below Nyquist.
Eigen::MatrixXd cwt_scalogram(const Sequence& x, const std::vector<double>& frequencies,
                              double omega0 = 6.0);

} // namespace havok
