#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "embezzle/compensated_sum.hpp"

namespace embezzle {

/// Schmidt coefficients of a state to embezzle: positive, non-increasing,
/// unit 2-norm.
class TargetState {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Validates the coefficients as given. Throws std::invalid_argument.
  explicit TargetState(std::vector<double> coeffs) : coeffs_{std::move(coeffs)} { validate(); }

  /// Sorts and rescales arbitrary positive weights to a valid target.
  static TargetState normalized(std::vector<double> weights) {
    if (weights.empty()) throw std::invalid_argument("target must have rank >= 1");
    CompensatedSum sq;
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("target weights must be positive and finite");
      }
      sq += w * w;
    }
    const double norm = std::sqrt(sq.value());
    for (double& w : weights) w /= norm;
    std::sort(weights.begin(), weights.end(), std::greater<>{});
    return TargetState{std::move(weights)};
  }

  [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] std::size_t rank() const noexcept { return coeffs_.size(); }
  [[nodiscard]] double operator[](std::size_t j) const noexcept { return coeffs_[j]; }

  friend bool operator==(const TargetState&, const TargetState&) = default;

 private:
  void validate() const {
    if (coeffs_.empty()) throw std::invalid_argument("target must have rank >= 1");
    CompensatedSum sq;
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      const double c = coeffs_[j];
      if (!(c > 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("target coefficients must be positive and finite");
      }
      if (j > 0 && c > coeffs_[j - 1]) {
        throw std::invalid_argument("target coefficients must be non-increasing");
      }
      sq += c * c;
    }
    if (std::abs(sq.value() - 1.0) > kNormTolerance) {
      throw std::invalid_argument("target coefficients must have unit 2-norm");
    }
  }

  std::vector<double> coeffs_;
};

namespace targets {

/// (2|00> + |11>)/sqrt(5)
inline TargetState phi_plus() {
  return TargetState{{2.0 / std::sqrt(5.0), 1.0 / std::sqrt(5.0)}};
}

/// (sqrt(pi - 1)|00> + |11>)/sqrt(pi)
inline TargetState phi_star() {
  constexpr double pi = std::numbers::pi;
  return TargetState{{std::sqrt((pi - 1.0) / pi), std::sqrt(1.0 / pi)}};
}

/// (|00> + |11>)/sqrt(2)
inline TargetState phi_circ() {
  return TargetState{{std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0}};
}

inline TargetState product() { return TargetState{{1.0}}; }

}  // namespace targets

}  // namespace embezzle
