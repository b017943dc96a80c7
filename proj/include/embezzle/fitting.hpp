#pragma once

// Least-squares fits of F(N) = a + b/N + c/N^2 and crossover estimates.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace embezzle {

struct FitPoint {
  double level;  ///< N
  double fidelity;
};

struct FitModel {
  double a = 0.0;  ///< constant term
  double b = 0.0;  ///< coefficient of 1/N
  double c = 0.0;  ///< coefficient of 1/N^2
  double first_level = 0.0;
  double last_level = 0.0;
  std::size_t points = 0;
  double rms_residual = 0.0;

  [[nodiscard]] double operator()(double level) const { return a + b / level + c / (level * level); }
};

namespace detail {

/// Solves A x = y for 3x3 A by Gaussian elimination with partial pivoting.
inline std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> y) {
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  for (std::size_t col = 0; col < 3; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < 3; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) <= 1e-14 * scale) throw std::invalid_argument("singular normal equations");
    std::swap(a[col], a[pivot]);
    std::swap(y[col], y[pivot]);
    for (std::size_t r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < 3; ++k) a[r][k] -= f * a[col][k];
      y[r] -= f * y[col];
    }
  }
  std::array<double, 3> x{};
  for (std::size_t i = 3; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < 3; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace detail

/// Ordinary least squares on {1, 1/N, 1/N^2} over the points with N >= first_level.
inline FitModel fit_inverse_poly(std::vector<FitPoint> points, double first_level) {
  std::erase_if(points, [&](const FitPoint& p) { return p.level < first_level; });
  // Sorting makes the result independent of input order.
  std::sort(points.begin(), points.end(), [](const FitPoint& x, const FitPoint& y) {
    return x.level < y.level || (x.level == y.level && x.fidelity < y.fidelity);
  });
  std::set<double> distinct;
  for (const auto& p : points) {
    if (!(p.level > 0.0)) throw std::invalid_argument("fit levels must be positive");
    distinct.insert(p.level);
  }
  if (distinct.size() < 3) throw std::invalid_argument("fit needs at least 3 distinct N values");

  std::array<std::array<double, 3>, 3> normal{};
  std::array<double, 3> rhs{};
  for (const auto& p : points) {
    const std::array<double, 3> basis{1.0, 1.0 / p.level, 1.0 / (p.level * p.level)};
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) normal[i][j] += basis[i] * basis[j];
      rhs[i] += basis[i] * p.fidelity;
    }
  }
  const auto x = detail::solve3(normal, rhs);
  FitModel model{x[0], x[1], x[2], points.front().level, points.back().level, points.size()};
  double sq = 0.0;
  for (const auto& p : points) {
    const double r = p.fidelity - model(p.level);
    sq += r * r;
  }
  model.rms_residual = std::sqrt(sq / static_cast<double>(points.size()));
  return model;
}

struct SensitivityReport {
  std::vector<FitModel> fits;  ///< one per starting level
  double spread_a = 0.0;
  double spread_b = 0.0;
  double spread_c = 0.0;
};

/// Refits with every starting level in [first, last] and reports how far
/// each coefficient moves (max - min).
inline SensitivityReport sensitivity_scan(const std::vector<FitPoint>& points, int first, int last) {
  if (first > last) throw std::invalid_argument("empty starting-level range");
  SensitivityReport report;
  for (int n0 = first; n0 <= last; ++n0) report.fits.push_back(fit_inverse_poly(points, n0));
  auto spread = [&](auto member) {
    auto [lo, hi] = std::minmax_element(report.fits.begin(), report.fits.end(),
                                        [&](const FitModel& x, const FitModel& y) { return x.*member < y.*member; });
    return (*hi).*member - (*lo).*member;
  };
  report.spread_a = spread(&FitModel::a);
  report.spread_b = spread(&FitModel::b);
  report.spread_c = spread(&FitModel::c);
  return report;
}

/// Largest N beyond both fit windows where the two models are equal, i.e.
/// the largest real root of da N^2 + db N + dc = 0. None if the curves do
/// not cross out there.
inline std::optional<double> crossover(const FitModel& first, const FitModel& second) {
  const double da = first.a - second.a;
  const double db = first.b - second.b;
  const double dc = first.c - second.c;
  const double beyond = std::max(first.last_level, second.last_level);
  std::vector<double> roots;
  if (da != 0.0) {
    const double disc = db * db - 4.0 * da * dc;
    if (disc < 0.0) return std::nullopt;
    // Numerically stable pair of roots.
    const double q = -0.5 * (db + std::copysign(std::sqrt(disc), db));
    roots.push_back(q / da);
    if (q != 0.0) roots.push_back(dc / q);
  } else if (db != 0.0) {
    roots.push_back(-dc / db);
  }
  std::optional<double> best;
  for (double r : roots) {
    if (r > beyond && (!best || r > *best)) best = r;
  }
  return best;
}

}  // namespace embezzle
