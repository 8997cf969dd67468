#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace vlab {

// In-place radix-2 FFT, forward (sign = -1) or inverse (sign = +1).
// Inverse includes the 1/N normalization. Length must be a power of two.
void fft(std::vector<std::complex<double>>& data, int sign);

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

// Periodogram of a real series (one-sided, bins k = 0 .. N/2), zero-padded
// to a power of two. Returns |X_k|^2 * dt / N, i.e. PSD in units^2/Hz.
std::vector<double> periodogram(const std::vector<double>& samples, double dt);

}  // namespace vlab
