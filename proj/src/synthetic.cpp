#include "havok/synthetic.hpp"

#include <cmath>

#include "havok/errors.hpp"
#include "havok/rng.hpp"

namespace havok {

SignalKind signal_kind_from_string(const std::string& name) {
    if (name == "lorenz") return SignalKind::lorenz;
    if (name == "sine") return SignalKind::sine;
    if (name == "chirp") return SignalKind::chirp;
    if (name == "noisy-sine") return SignalKind::noisy_sine;
    throw ConfigError("unknown generator kind '" + name +
                      "' (expected lorenz, sine, chirp or noisy-sine)");
}

std::string to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::lorenz: return "lorenz";
        case SignalKind::sine: return "sine";
        case SignalKind::chirp: return "chirp";
        case SignalKind::noisy_sine: return "noisy-sine";
    }
    return "?";
}

namespace {

std::array<double, 3> lorenz_rhs(const std::array<double, 3>& s, double sigma, double rho,
                                 double beta) {
    return {sigma * (s[1] - s[0]), s[0] * (rho - s[2]) - s[1], s[0] * s[1] - beta * s[2]};
}

} // namespace

std::array<double, 3> lorenz_rk4_step(const std::array<double, 3>& state, double dt, double sigma,
                                      double rho, double beta) {
    const auto k1 = lorenz_rhs(state, sigma, rho, beta);
    std::array<double, 3> mid1;
    for (int i = 0; i < 3; ++i) mid1[i] = state[i] + 0.5 * dt * k1[i];
    const auto k2 = lorenz_rhs(mid1, sigma, rho, beta);
    std::array<double, 3> mid2;
    for (int i = 0; i < 3; ++i) mid2[i] = state[i] + 0.5 * dt * k2[i];
    const auto k3 = lorenz_rhs(mid2, sigma, rho, beta);
    std::array<double, 3> end;
    for (int i = 0; i < 3; ++i) end[i] = state[i] + dt * k3[i];
    const auto k4 = lorenz_rhs(end, sigma, rho, beta);

    std::array<double, 3> out;
    for (int i = 0; i < 3; ++i) {
        out[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

Sequence generate(const GeneratorSpec& spec) {
    if (!(spec.dt > 0.0)) {
        throw ConfigError("generator: dt must be positive");
    }
    if (spec.n_samples < 2) {
        throw ConfigError("generator: n_samples must be at least 2");
    }

    ExperimentParams params;
    params.id = spec.id.empty() ? to_string(spec.kind) : spec.id;
    params.attrs["kind"] = to_string(spec.kind);

    std::vector<double> x(spec.n_samples);
    switch (spec.kind) {
        case SignalKind::sine: {
            params.attrs["frequency"] = spec.frequency;
            params.attrs["amplitude"] = spec.amplitude;
            for (std::size_t i = 0; i < spec.n_samples; ++i) {
                const double t = static_cast<double>(i) * spec.dt;
                x[i] = spec.amplitude * std::sin(2.0 * M_PI * spec.frequency * t + spec.phase);
            }
            break;
        }
        case SignalKind::chirp: {
            params.attrs["frequency"] = spec.frequency;
            params.attrs["frequency_end"] = spec.frequency_end;
            const double duration = static_cast<double>(spec.n_samples - 1) * spec.dt;
            const double rate = (spec.frequency_end - spec.frequency) / duration;
            for (std::size_t i = 0; i < spec.n_samples; ++i) {
                const double t = static_cast<double>(i) * spec.dt;
                const double arg =
                    2.0 * M_PI * (spec.frequency * t + 0.5 * rate * t * t) + spec.phase;
                x[i] = spec.amplitude * std::sin(arg);
            }
            break;
        }
        case SignalKind::noisy_sine: {
            params.attrs["frequency"] = spec.frequency;
            params.attrs["noise_sigma"] = spec.noise_sigma;
            params.attrs["seed"] = static_cast<double>(spec.seed);
            Rng rng(spec.seed);
            for (std::size_t i = 0; i < spec.n_samples; ++i) {
                const double t = static_cast<double>(i) * spec.dt;
                x[i] = spec.amplitude * std::sin(2.0 * M_PI * spec.frequency * t + spec.phase) +
                       spec.noise_sigma * rng.normal();
            }
            break;
        }
        case SignalKind::lorenz: {
            params.attrs["sigma"] = spec.sigma;
            params.attrs["rho"] = spec.rho;
            params.attrs["beta"] = spec.beta;
            std::array<double, 3> state = spec.initial_state;
            const auto transient_steps =
                static_cast<std::size_t>(std::ceil(spec.transient / spec.dt));
            for (std::size_t i = 0; i < transient_steps; ++i) {
                state = lorenz_rk4_step(state, spec.dt, spec.sigma, spec.rho, spec.beta);
            }
            for (std::size_t i = 0; i < spec.n_samples; ++i) {
                x[i] = state[0];
                state = lorenz_rk4_step(state, spec.dt, spec.sigma, spec.rho, spec.beta);
            }
            break;
        }
    }

    return Sequence(std::move(x), spec.dt, std::move(params));
}

} // namespace havok
