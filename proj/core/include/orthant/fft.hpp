#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace orthant {

/// Complex FFT of a fixed power-of-two length (FFTW, estimate-mode plan so
/// results do not depend on timing). Shareable read-only between threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t size);

  std::size_t size() const noexcept { return size_; }

  /// In place, unnormalized: X_k = sum_j x_j exp(-2 pi i jk / N).
  void forward(std::span<std::complex<double>> data) const;

 private:
  std::size_t size_;
  std::shared_ptr<void> plan_;
};

std::size_t next_power_of_two(std::size_t n) noexcept;

}  // namespace orthant
