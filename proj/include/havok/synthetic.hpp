#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "havok/signal.hpp"

namespace havok {

enum class SignalKind { lorenz, sine, chirp, noisy_sine };

SignalKind signal_kind_from_string(const std::string& name);
std::string to_string(SignalKind kind);

/// Deterministic test-signal recipe. Every field that matters is explicit
/// so a fixed spec reproduces the same samples bit-for-bit (the noise path
/// uses the pinned xoshiro256++ generator, see rng.hpp).
struct GeneratorSpec {
    SignalKind kind = SignalKind::sine;
    double dt = 0.01;
    std::size_t n_samples = 1000;
    std::string id;

    // sine / chirp / noisy-sine
    double amplitude = 1.0;
    double frequency = 1.0;     ///< Hz; chirp start frequency
    double frequency_end = 2.0; ///< Hz; chirp end frequency (reached at the last sample)
    double phase = 0.0;         ///< radians
    double noise_sigma = 0.1;   ///< noisy-sine additive Gaussian sigma
    std::uint64_t seed = 0;

    // lorenz
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    std::array<double, 3> initial_state = {-8.0, 8.0, 27.0};
    double transient = 10.0; ///< time units discarded before sampling starts
};

/// Produce the sequence described by `spec`. The Lorenz system is
/// integrated with classical RK4 at the sample step and its x-coordinate
/// is returned after the transient is discarded.
Sequence generate(const GeneratorSpec& spec);

/// One RK4 step of the Lorenz system; exposed for the integrator-order tests.
std::array<double, 3> lorenz_rk4_step(const std::array<double, 3>& state, double dt,
                                      double sigma, double rho, double beta);

} // namespace havok
