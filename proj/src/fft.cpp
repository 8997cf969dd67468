#include "vlab/fft.hpp"

#include <cmath>
#include <stdexcept>

#include "vlab/constants.hpp"

namespace vlab {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& data, int sign) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft: length must be a power of two");
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (sign > 0) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= inv;
  }
}

std::vector<double> periodogram(const std::vector<double>& samples, double dt) {
  const std::size_t n = next_power_of_two(samples.size());
  std::vector<std::complex<double>> buf(n, {0.0, 0.0});
  for (std::size_t i = 0; i < samples.size(); ++i) buf[i] = samples[i];
  fft(buf, -1);
  // One-sided PSD estimate on the padded grid, normalized by the original
  // sample count so Parseval holds for the unpadded series.
  const double norm = dt / static_cast<double>(samples.size());
  std::vector<double> psd(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double scale = (k == 0 || k == n / 2) ? 1.0 : 2.0;
    psd[k] = scale * std::norm(buf[k]) * norm;
  }
  return psd;
}

}  // namespace vlab
