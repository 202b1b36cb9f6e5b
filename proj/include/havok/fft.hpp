#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace havok {

/// Smallest power of two >= n.
std::size_t next_power_of_two(std::size_t n);

/// In-place iterative radix-2 Cooley-Tukey FFT. The length must be a
/// power of two. inverse=true applies the conjugate transform and the
/// 1/N normalization.
void fft_radix2(std::vector<std::complex<double>>& buf, bool inverse = false);

/// Periodogram power |X_k|^2 / n at the positive-frequency bins
/// k = 1 .. n_fft/2 of the signal zero-padded to the next power of two.
/// The mean is removed before padding so bin 0 (excluded) does not leak.
/// Returns the powers; bin k corresponds to frequency k / (n_fft * dt).
struct Periodogram {
    std::vector<double> power; ///< bins 1 .. n_fft/2
    std::size_t n_fft;
    double dt;

    double frequency(std::size_t bin_index) const {
        // bin_index is 0-based into `power`, i.e. FFT bin bin_index+1
        return static_cast<double>(bin_index + 1) / (static_cast<double>(n_fft) * dt);
    }
};

Periodogram periodogram(const std::vector<double>& x, double dt);

} // namespace havok
