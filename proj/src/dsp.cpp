#include "mbjcas/dsp.hpp"

#include <utility>

namespace mbjcas {

void fft_pow2(std::span<cd> data, bool inverse) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n)) throw ValidationError("fft_pow2: size must be a power of two");
    if (n == 1) return;

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                // Per-step polar() twiddles keep rounding independent of n.
                const cd w = std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(k) /
                                                 static_cast<double>(len));
                const cd u = data[start + k];
                const cd v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
    }
}

std::vector<cd> dft_naive(std::span<const cd> data, bool inverse) {
    const std::size_t n = data.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cd> out(n, cd{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        cd acc{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m) {
            acc += data[m] * std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(k) *
                                                 static_cast<double>(m) / static_cast<double>(n));
        }
        out[k] = acc;
    }
    return out;
}

std::vector<cd> dft(std::span<const cd> data, bool inverse) {
    if (is_power_of_two(data.size())) {
        std::vector<cd> out(data.begin(), data.end());
        fft_pow2(out, inverse);
        return out;
    }
    return dft_naive(data, inverse);
}

} // namespace mbjcas
