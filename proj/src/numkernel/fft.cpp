#include <cmath>
#include <numbers>
#include <string>

#include "qsd/errors.hpp"
#include "qsd/numkernel.hpp"

namespace qsd {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

namespace {

void require_power_of_two(std::size_t n) {
  if (!is_power_of_two(n))
    throw ConfigurationError("FFT length " + std::to_string(n) + " is not a power of two");
}

// Iterative radix-2 decimation-in-time transform, in place:
// data_k <- sum_j data_j exp(sign * 2 pi i jk/n). Twiddles are evaluated directly (no recurrence) to keep
// the round-off at O(eps log n).
void radix2(Complex* data, std::size_t n, int sign) {
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  if (n < 2) return;

  std::vector<Complex> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(angle), std::sin(angle)};
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex t = twiddle[k * stride] * data[start + k + half];
        const Complex u = data[start + k];
        data[start + k] = u + t;
        data[start + k + half] = u - t;
      }
    }
  }
}

ComplexMatrix transform2(const ComplexMatrix& values, int sign) {
  const auto rows = static_cast<std::size_t>(values.rows());
  const auto cols = static_cast<std::size_t>(values.cols());
  require_power_of_two(rows);
  require_power_of_two(cols);
  ComplexMatrix out = values;
  for (Eigen::Index c = 0; c < out.cols(); ++c) radix2(out.col(c).data(), rows, sign);
  ComplexVector buffer(out.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    buffer = out.row(r).transpose();
    radix2(buffer.data(), cols, sign);
    out.row(r) = buffer.transpose();
  }
  return out;
}

}  // namespace

ComplexVector fft(const ComplexVector& values) {
  const auto n = static_cast<std::size_t>(values.size());
  require_power_of_two(n);
  ComplexVector out = values;
  radix2(out.data(), n, +1);
  return out;
}

ComplexVector ifft(const ComplexVector& values) {
  const auto n = static_cast<std::size_t>(values.size());
  require_power_of_two(n);
  ComplexVector out = values;
  radix2(out.data(), n, -1);
  out /= static_cast<double>(n);
  return out;
}

ComplexMatrix fft2(const ComplexMatrix& values) { return transform2(values, +1); }

ComplexMatrix ifft2(const ComplexMatrix& values) {
  ComplexMatrix out = transform2(values, -1);
  out /= static_cast<double>(values.rows() * values.cols());
  return out;
}

}  // namespace qsd
