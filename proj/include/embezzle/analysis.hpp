#pragma once

// Entanglement entropy, normalization growth, and the numeric forms of the
// asymptotic conditions that make a family universal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "embezzle/compensated_sum.hpp"
#include "embezzle/families.hpp"

namespace embezzle {

/// Entanglement entropy in bits: -sum p log2 p with p = value^2 / norm_sq.
/// One logarithm per run, so the sine family costs O(N).
inline double entanglement_entropy(const SpectrumSource& mu) {
  const double log_norm = std::log(mu.norm_sq());
  CompensatedSum nats;
  mu.with_generator([&](const auto& gen) {
    auto c = gen.cursor();
    while (!c.done()) {
      const Run r = c.head();
      const double p = r.value * r.value / mu.norm_sq();
      nats += -static_cast<double>(r.count) * p * (2.0 * std::log(r.value) - log_norm);
      c.consume(r.count);
    }
  });
  return nats.value() / std::numbers::ln2;
}

/// Leading-term entropy estimates: (log2 n)/2 for FDH, (2/3) log2 n for G_1,
/// (log2 n)/(ln ln n) for H_1.
inline double entropy_prediction(const FamilySpec& spec, std::uint64_t n) {
  if (n < 16) throw std::invalid_argument("entropy prediction requires n >= 16");
  const double log2n = std::log2(static_cast<double>(n));
  if (spec.kind == FamilyKind::fdh) return log2n / 2.0;
  if (spec.kind == FamilyKind::g && spec.r == 1) return 2.0 * log2n / 3.0;
  if (spec.kind == FamilyKind::h && spec.r == 1) return log2n / std::log(std::log(static_cast<double>(n)));
  throw std::invalid_argument("no entropy prediction for family " + spec.name());
}

/// Measured normalization C(f, n) against its predicted order.
struct OrderEstimate {
  FamilySpec family;
  std::uint64_t n = 0;
  double measured = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
};

/// Predicted growth of C(f, n): ln n (FDH, GH), (ln n)^2/2 (G_1),
/// lambda^{r+1}(n) (H_r).
inline double predicted_order(const FamilySpec& spec, std::uint64_t n) {
  const double x = static_cast<double>(n);
  switch (spec.kind) {
    case FamilyKind::fdh:
    case FamilyKind::gh: return std::log(x);
    case FamilyKind::g:
      if (spec.r == 1) return std::log(x) * std::log(x) / 2.0;
      break;
    case FamilyKind::h: return lambda_eval(static_cast<unsigned>(spec.r + 1), x);
    default: break;
  }
  throw std::invalid_argument("no order prediction for family " + spec.name());
}

inline std::vector<OrderEstimate> order_estimates(const FamilySpec& spec, const std::vector<std::uint64_t>& ns) {
  const auto measured = norm_checkpoints(spec, ns);
  std::vector<OrderEstimate> out;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double predicted = predicted_order(spec, ns[i]);
    out.push_back({spec, ns[i], measured[i], predicted, measured[i] / predicted});
  }
  return out;
}

/// C(f, floor(n/m)) / C(f, n).
inline double order_ratio(const FamilySpec& spec, std::uint64_t m, std::uint64_t n) {
  if (m == 0 || n < m) throw std::invalid_argument("order ratio requires 1 <= m <= n");
  if (m == 1) return 1.0;
  const auto c = norm_checkpoints(spec, {n / m, n});
  return c[0] / c[1];
}

struct DivergenceReport {
  int r = 0;
  std::vector<std::uint64_t> samples;
  std::vector<double> ratios;  ///< C(G_{r+1}, n) / C(G_r, n)
  bool all_at_least_one = true;
  bool increasing = true;
};

/// Shows numerically that each G class has a strictly higher order than the
/// one below it: the ratio of normalizations is >= 1 and keeps growing.
inline DivergenceReport order_divergence_check(int r, const std::vector<std::uint64_t>& samples) {
  if (!std::is_sorted(samples.begin(), samples.end()) ||
      std::adjacent_find(samples.begin(), samples.end()) != samples.end()) {
    throw std::invalid_argument("samples must be strictly increasing");
  }
  DivergenceReport report;
  report.r = r;
  report.samples = samples;
  const auto upper = norm_checkpoints(FamilySpec::g(r + 1), samples);
  const auto lower = norm_checkpoints(FamilySpec::g(r), samples);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    report.ratios.push_back(upper[i] / lower[i]);
    if (report.ratios[i] < 1.0) report.all_at_least_one = false;
    if (i > 0 && !(report.ratios[i] > report.ratios[i - 1])) report.increasing = false;
  }
  return report;
}

struct Mu1Point {
  int level = 0;
  double mu1 = 0.0;
};

struct Mu1Decay {
  FamilySpec family;
  std::vector<Mu1Point> points;
  bool strictly_decreasing = true;
};

/// Normalized leading coefficient mu_1 at each level (n = 2^N, or N nested
/// levels for the sine family).
inline Mu1Decay mu1_decay(const FamilySpec& spec, const std::vector<int>& levels) {
  Mu1Decay out;
  out.family = spec;
  if (levels.empty()) return out;
  if (!std::is_sorted(levels.begin(), levels.end())) throw std::invalid_argument("levels must be ascending");
  if (spec.kind == FamilyKind::sine) {
    for (int level : levels) out.points.push_back({level, sine_spectrum(level, spec.sine_rank).mu1()});
  } else {
    std::vector<std::uint64_t> ns;
    for (int level : levels) {
      if (level < 0 || level > 62) throw std::invalid_argument("level N must lie in [0, 62]");
      ns.push_back(std::uint64_t{1} << level);
    }
    const auto norms = norm_checkpoints(spec, ns);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double first = spec.kind == FamilyKind::gh ? GhCursor{ns[i]}.head().value : regular_value(spec, 1);
      out.points.push_back({levels[i], first / std::sqrt(norms[i])});
    }
  }
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    if (!(out.points[i].mu1 < out.points[i - 1].mu1)) out.strictly_decreasing = false;
  }
  return out;
}

/// Lower bound on 1 - F for the maximally entangled pair:
/// (1/2)(mu_1 - mu_1/sqrt 2)^2.
inline double maximally_entangled_gap_bound(double mu1) {
  const double d = 1.0 - 1.0 / std::numbers::sqrt2;
  return 0.5 * d * d * mu1 * mu1;
}

/// h(kx + c) / h(x) for the slowly varying factor h = f sqrt(x) of a G or H
/// family (the prefactor of 1/sqrt(x)).
inline double scaling_ratio(const FamilySpec& spec, double k, double c, double x) {
  if (spec.kind != FamilyKind::g && spec.kind != FamilyKind::h) {
    throw std::invalid_argument("scaling ratio is defined for G and H families");
  }
  const double y = k * x + c;
  const double ratio = detail::lambda_product(spec.r, y) / detail::lambda_product(spec.r, x);
  return spec.kind == FamilyKind::g ? std::sqrt(ratio) : 1.0 / std::sqrt(ratio);
}

}  // namespace embezzle
