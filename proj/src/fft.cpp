#include "havok/fft.hpp"

#include <cmath>

#include "havok/errors.hpp"

namespace havok {

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_radix2(std::vector<std::complex<double>>& buf, bool inverse) {
    const std::size_t n = buf.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        throw ConfigError("fft: length must be a nonzero power of two");
    }
    if (n == 1) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(buf[i], buf[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const std::complex<double> w_len(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = buf[i + j];
                const std::complex<double> v = buf[i + j + len / 2] * w;
                buf[i + j] = u + v;
                buf[i + j + len / 2] = u - v;
                w *= w_len;
            }
        }
    }

    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& c : buf) c *= inv_n;
    }
}

Periodogram periodogram(const std::vector<double>& x, double dt) {
    const std::size_t n = x.size();
    if (n < 2) {
        throw DataError("periodogram: need at least 2 samples");
    }
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    const std::size_t n_fft = next_power_of_two(n);
    std::vector<std::complex<double>> buf(n_fft, 0.0);
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i] - mean;
    fft_radix2(buf);

    Periodogram out;
    out.n_fft = n_fft;
    out.dt = dt;
    out.power.resize(n_fft / 2);
    for (std::size_t k = 1; k <= n_fft / 2; ++k) {
        out.power[k - 1] = std::norm(buf[k]) / static_cast<double>(n);
    }
    return out;
}

} // namespace havok
