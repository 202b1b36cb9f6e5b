#include "havok/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "havok/errors.hpp"
#include "havok/fft.hpp"

namespace havok {

ForcingMode forcing_mode_from_string(const std::string& name) {
    if (name == "measured") return ForcingMode::measured;
    if (name == "zero") return ForcingMode::zero;
    if (name == "held") return ForcingMode::held;
    throw ConfigError("unknown forcing mode '" + name + "' (expected measured, zero or held)");
}

std::string to_string(ForcingMode mode) {
    switch (mode) {
        case ForcingMode::measured: return "measured";
        case ForcingMode::zero: return "zero";
        case ForcingMode::held: return "held";
    }
    return "?";
}

ForecastResult simulate(const HavokModel& model, const Eigen::VectorXd& v0,
                        std::span<const double> forcing, ForcingMode mode, int steps) {
    const Eigen::Index m = model.linear.rows();
    if (v0.size() != m) {
        throw ConfigError("simulate: v0 has " + std::to_string(v0.size()) +
                          " entries, the model expects " + std::to_string(m));
    }
    if (steps < 1) {
        throw ConfigError("simulate: steps must be >= 1");
    }
    if (mode == ForcingMode::measured && forcing.size() < static_cast<std::size_t>(steps)) {
        throw DataError("simulate: measured forcing has " + std::to_string(forcing.size()) +
                        " samples, need " + std::to_string(steps));
    }
    if (mode == ForcingMode::held && forcing.empty()) {
        throw DataError("simulate: held forcing needs at least one sample to repeat");
    }

    ForecastResult out;
    out.mode = mode;
    out.horizon = steps;
    out.v_traj.resize(steps, m);
    out.forcing_used.resize(static_cast<std::size_t>(steps));

    const double dt = model.dt;
    Eigen::VectorXd v = v0;
    Eigen::VectorXd k1(m), k2(m), k3(m), k4(m);
    for (int step = 0; step < steps; ++step) {
        double u = 0.0;
        switch (mode) {
            case ForcingMode::measured: u = forcing[static_cast<std::size_t>(step)]; break;
            case ForcingMode::zero: u = 0.0; break;
            case ForcingMode::held: u = forcing.back(); break;
        }
        out.v_traj.row(step) = v.transpose();
        out.forcing_used[static_cast<std::size_t>(step)] = u;

        // RK4 with the forcing held constant over the step
        const Eigen::VectorXd bu = model.forcing * u;
        k1 = model.linear * v + bu;
        k2 = model.linear * (v + 0.5 * dt * k1) + bu;
        k3 = model.linear * (v + 0.5 * dt * k2) + bu;
        k4 = model.linear * (v + dt * k3) + bu;
        v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    Eigen::MatrixXd full(steps, m + 1);
    full.leftCols(m) = out.v_traj;
    for (int step = 0; step < steps; ++step) {
        full(step, m) = out.forcing_used[static_cast<std::size_t>(step)];
    }
    out.x_hat = reconstruct(model, full);
    return out;
}

std::vector<double> reconstruct(const HavokModel& model, const Eigen::MatrixXd& v_traj) {
    const int r = model.rank;
    Eigen::MatrixXd full;
    if (v_traj.cols() == r) {
        full = v_traj;
    } else if (v_traj.cols() == r - 1) {
        full.setZero(v_traj.rows(), r);
        full.leftCols(r - 1) = v_traj;
    } else {
        throw ConfigError("reconstruct: trajectory has " + std::to_string(v_traj.cols()) +
                          " columns, the model expects " + std::to_string(r) + " or " +
                          std::to_string(r - 1));
    }
    // first Hankel row is the undelayed signal
    const Eigen::VectorXd weights = model.u_r.row(0).transpose().cwiseProduct(model.s_r);
    const Eigen::VectorXd x = full * weights;
    return {x.data(), x.data() + x.size()};
}

std::vector<IndexInterval> forcing_active(std::span<const double> v_r, double eps_force,
                                          std::size_t merge_gap) {
    std::vector<IndexInterval> intervals;
    bool open = false;
    IndexInterval current;
    for (std::size_t i = 0; i < v_r.size(); ++i) {
        if (std::abs(v_r[i]) > eps_force) {
            if (!open) {
                current.first = i;
                open = true;
            }
            current.last = i;
        } else if (open) {
            intervals.push_back(current);
            open = false;
        }
    }
    if (open) intervals.push_back(current);

    if (merge_gap == 0 || intervals.size() < 2) return intervals;
    std::vector<IndexInterval> merged;
    merged.push_back(intervals.front());
    for (std::size_t i = 1; i < intervals.size(); ++i) {
        if (intervals[i].first - merged.back().last - 1 < merge_gap) {
            merged.back().last = intervals[i].last;
        } else {
            merged.push_back(intervals[i]);
        }
    }
    return merged;
}

ErrorEvolution error_evolution(const std::vector<std::vector<double>>& predictions,
                               const std::vector<std::vector<double>>& truths) {
    if (predictions.empty() || predictions.size() != truths.size()) {
        throw ConfigError("error_evolution: ensembles must be nonempty and equally sized");
    }
    const std::size_t horizon = predictions.front().size();
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].size() != horizon || truths[i].size() != horizon) {
            throw ConfigError("error_evolution: member " + std::to_string(i) +
                              " has a mismatched length");
        }
    }

    const double n = static_cast<double>(predictions.size());
    ErrorEvolution out;
    out.rmse.resize(horizon);
    out.mae.resize(horizon);
    out.vae.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        double sum_sq = 0.0, sum_abs = 0.0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const double e = predictions[i][t] - truths[i][t];
            sum_sq += e * e;
            sum_abs += std::abs(e);
        }
        const double mae = sum_abs / n;
        double var_abs = 0.0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const double a = std::abs(predictions[i][t] - truths[i][t]) - mae;
            var_abs += a * a;
        }
        out.rmse[t] = std::sqrt(sum_sq / n);
        out.mae[t] = mae;
        out.vae[t] = var_abs / n;
    }
    return out;
}

Histogram histogram(std::span<const double> values, int bins) {
    if (values.empty() || bins < 1) {
        throw ConfigError("histogram: need samples and bins >= 1");
    }
    Histogram h;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    h.lo = *lo;
    h.hi = *hi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = h.hi - h.lo;
    for (double v : values) {
        int b = width > 0.0 ? static_cast<int>((v - h.lo) / width * bins) : 0;
        b = std::min(std::max(b, 0), bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

Eigen::MatrixXd cwt_scalogram(const Sequence& x, const std::vector<double>& frequencies,
                              double omega0) {
    const double nyquist = 0.5 / x.dt();
    if (frequencies.empty()) {
        throw ConfigError("cwt: no frequencies requested");
    }
    for (double f : frequencies) {
        if (!(f > 0.0) || f >= nyquist) {
            throw ConfigError("cwt: frequency " + format_double(f) +
                              " outside (0, nyquist = " + format_double(nyquist) + ")");
        }
    }

    const std::size_t n = x.size();
    const std::size_t n_fft = next_power_of_two(2 * n); // padding damps circular wrap
    std::vector<std::complex<double>> spectrum(n_fft, 0.0);
    for (std::size_t i = 0; i < n; ++i) spectrum[i] = x.values()[i];
    fft_radix2(spectrum);

    const double norm_base = std::pow(M_PI, -0.25);
    Eigen::MatrixXd scalogram(static_cast<Eigen::Index>(frequencies.size()),
                              static_cast<Eigen::Index>(n));
    std::vector<std::complex<double>> row(n_fft);
    for (std::size_t fi = 0; fi < frequencies.size(); ++fi) {
        const double scale = omega0 / (2.0 * M_PI * frequencies[fi]);
        const double norm = norm_base * std::sqrt(2.0 * M_PI * scale / x.dt());
        for (std::size_t k = 0; k < n_fft; ++k) {
            // analytic Morlet: support on positive angular frequencies only
            const double w = 2.0 * M_PI * static_cast<double>(k) /
                             (static_cast<double>(n_fft) * x.dt());
            double psi = 0.0;
            if (k > 0 && k < n_fft / 2 + 1) {
                const double arg = scale * w - omega0;
                psi = norm * std::exp(-0.5 * arg * arg);
            }
            row[k] = spectrum[k] * psi;
        }
        fft_radix2(row, /*inverse=*/true);
        for (std::size_t t = 0; t < n; ++t) {
            scalogram(static_cast<Eigen::Index>(fi), static_cast<Eigen::Index>(t)) =
                std::abs(row[t]);
        }
    }
    return scalogram;
}

} // namespace havok
