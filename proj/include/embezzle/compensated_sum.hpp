#pragma once

#include <cmath>

namespace embezzle {

/// Running sum with Neumaier's (improved Kahan-Babuska) compensation.
///
/// The low-order bits lost by each addition are collected in a separate
/// compensation term and folded back in when the value is read. Unlike plain
/// Kahan summation this stays accurate when an addend is larger in magnitude
/// than the running sum, which happens at the first few terms of every
/// spectrum accumulation.
///
/// Must not be compiled with -ffast-math; reassociation erases the correction.
class CompensatedSum {
 public:
  constexpr CompensatedSum() = default;
  constexpr explicit CompensatedSum(double initial) : sum_{initial} {}

  constexpr CompensatedSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  constexpr CompensatedSum& operator+=(const CompensatedSum& other) noexcept {
    *this += other.sum_;
    compensation_ += other.compensation_;
    return *this;
  }

  [[nodiscard]] constexpr double value() const noexcept { return sum_ + compensation_; }
  [[nodiscard]] constexpr double raw_sum() const noexcept { return sum_; }
  [[nodiscard]] constexpr double compensation() const noexcept { return compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace embezzle
