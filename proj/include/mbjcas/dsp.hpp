#pragma once

#include <span>
#include <vector>

#include "mbjcas/types.hpp"

namespace mbjcas {

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place radix-2 FFT. Unnormalized: forward computes sum x_n e^{-j2pi nk/N},
/// inverse computes sum x_n e^{+j2pi nk/N}. Size must be a power of two.
void fft_pow2(std::span<cd> data, bool inverse);

/// Naive O(n^2) DFT with the same conventions; reference path and fallback
/// for sizes that are not powers of two.
std::vector<cd> dft_naive(std::span<const cd> data, bool inverse);

/// Unnormalized transform of any size: radix-2 when possible, naive otherwise.
std::vector<cd> dft(std::span<const cd> data, bool inverse);

} // namespace mbjcas
