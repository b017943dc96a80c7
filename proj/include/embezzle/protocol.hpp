#pragma once

// Dense simulation of permutation protocols on Schmidt coefficient vectors.
//
// A permutation isometry acts identically on both parties, so its effect on
// sum_s c_s |s>|s> is fully described by where each index s goes. States
// are therefore represented by one coefficient vector and protocols by an
// injective index map; overlaps are plain dot products.
//
// Index layout for a two-register system A (dim a) x B (dim b) is a_idx*b + b_idx.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "embezzle/compensated_sum.hpp"
#include "embezzle/families.hpp"
#include "embezzle/parallel.hpp"
#include "embezzle/target.hpp"

namespace embezzle {

/// Dense Schmidt coefficients, unit 2-norm, any order.
class SchmidtVector {
 public:
  static constexpr double kNormTolerance = 1e-12;

  explicit SchmidtVector(std::vector<double> coeffs) : coeffs_{std::move(coeffs)} {
    if (coeffs_.empty()) throw std::invalid_argument("Schmidt vector must have dimension >= 1");
    CompensatedSum sq;
    for (double c : coeffs_) {
      if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("Schmidt coefficients must be non-negative");
      sq += c * c;
    }
    if (std::abs(sq.value() - 1.0) > kNormTolerance) {
      throw std::invalid_argument("Schmidt vector must have unit 2-norm");
    }
  }

  /// Rescales non-negative weights to unit norm.
  static SchmidtVector normalized(std::vector<double> weights) {
    CompensatedSum sq;
    for (double w : weights) sq += w * w;
    const double norm = std::sqrt(sq.value());
    if (!(norm > 0.0)) throw std::invalid_argument("Schmidt vector must be non-zero");
    for (double& w : weights) w /= norm;
    return SchmidtVector{std::move(weights)};
  }

  static SchmidtVector from_spectrum(const SpectrumSource& source, std::uint64_t max_dim = 1u << 16) {
    return normalized(source.expand(max_dim));
  }

  [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] std::size_t dim() const noexcept { return coeffs_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return coeffs_[i]; }
  [[nodiscard]] bool sorted() const { return std::is_sorted(coeffs_.begin(), coeffs_.end(), std::greater<>{}); }

 private:
  std::vector<double> coeffs_;
};

/// Injective map from source basis index to target basis index.
class PermutationIsometry {
 public:
  PermutationIsometry(std::vector<std::size_t> mapping, std::size_t target_dim)
      : mapping_{std::move(mapping)}, target_dim_{target_dim} {
    if (target_dim_ < mapping_.size()) throw std::invalid_argument("isometry cannot shrink the space");
    std::vector<bool> hit(target_dim_, false);
    for (std::size_t t : mapping_) {
      if (t >= target_dim_ || hit[t]) throw std::invalid_argument("isometry mapping must be injective");
      hit[t] = true;
    }
  }

  static PermutationIsometry identity(std::size_t dim) {
    std::vector<std::size_t> m(dim);
    std::iota(m.begin(), m.end(), std::size_t{0});
    return {std::move(m), dim};
  }

  [[nodiscard]] std::span<const std::size_t> mapping() const noexcept { return mapping_; }
  [[nodiscard]] std::size_t source_dim() const noexcept { return mapping_.size(); }
  [[nodiscard]] std::size_t target_dim() const noexcept { return target_dim_; }
  [[nodiscard]] std::size_t operator()(std::size_t s) const noexcept { return mapping_[s]; }

  /// U (x) U acting on a Schmidt coefficient vector.
  [[nodiscard]] std::vector<double> apply(std::span<const double> state) const {
    if (state.size() != mapping_.size()) throw std::invalid_argument("state dimension does not match isometry");
    std::vector<double> out(target_dim_, 0.0);
    for (std::size_t s = 0; s < mapping_.size(); ++s) out[mapping_[s]] = state[s];
    return out;
  }

  /// This map followed by `next`.
  [[nodiscard]] PermutationIsometry then(const PermutationIsometry& next) const {
    if (next.source_dim() != target_dim_) throw std::invalid_argument("isometry dimensions do not compose");
    std::vector<std::size_t> m(mapping_.size());
    for (std::size_t s = 0; s < m.size(); ++s) m[s] = next(mapping_[s]);
    return {std::move(m), next.target_dim()};
  }

 private:
  std::vector<std::size_t> mapping_;
  std::size_t target_dim_;
};

/// Coefficients of |mu>|phi> with layout i*m + j.
inline std::vector<double> tensor(std::span<const double> mu, std::span<const double> phi) {
  std::vector<double> out;
  out.reserve(mu.size() * phi.size());
  for (double a : mu) {
    for (double b : phi) out.push_back(a * b);
  }
  return out;
}

inline double overlap(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("overlap of vectors with different dimensions");
  CompensatedSum sum;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum.value();
}

/// <mu|<phi| (U (x) U) |mu>.
inline double protocol_fidelity(const SchmidtVector& mu, const TargetState& target, const PermutationIsometry& u) {
  return overlap(u.apply(mu.coeffs()), tensor(mu.coeffs(), target.coeffs()));
}

/// The permutation sending mu's i-th basis state to the position of the
/// i-th largest product mu_k phi_j (layout k*m + j). Ties go to the lower
/// product index.
inline PermutationIsometry optimal_isometry(const SchmidtVector& mu, const TargetState& target) {
  if (!mu.sorted()) throw std::invalid_argument("optimal isometry requires sorted coefficients");
  const auto products = tensor(mu.coeffs(), target.coeffs());
  std::vector<std::size_t> order(products.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return products[a] > products[b]; });
  order.resize(mu.dim());
  return {std::move(order), products.size()};
}

// ---------------------------------------------------------------------------
// Embezzlement in superposition

struct SuperposedBlock {
  double weight;
  TargetState target;
};

struct SuperpositionResult {
  double fidelity = 0.0;
  std::vector<double> block_fidelities;
  double min_block_fidelity = 1.0;
  PermutationIsometry isometry = PermutationIsometry::identity(1);
};

/// sum_j a_j |mu>|jj>  ->  sum_j a_j |mu>|phi_j>, with phi_j supported on
/// indices m(j-1)+1 .. mj of the output register.
///
/// The isometry is the block-diagonal sum of the per-block optimal maps,
/// source (i, j) -> (i', m j + l) when the j-th map sends i to (i', l).
inline SuperpositionResult superposed_embezzlement(const SchmidtVector& mu, const std::vector<SuperposedBlock>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("superposition needs at least one block");
  const std::size_t k = blocks.size();
  const std::size_t m = blocks.front().target.rank();
  CompensatedSum weight_sq;
  for (const auto& b : blocks) {
    if (b.target.rank() != m) throw std::invalid_argument("all blocks must share one target rank");
    weight_sq += b.weight * b.weight;
  }
  if (std::abs(weight_sq.value() - 1.0) > 1e-12) throw std::invalid_argument("block weights must have unit 2-norm");

  const std::size_t n = mu.dim();
  const std::size_t out_reg = m * k;
  SuperpositionResult result;
  std::vector<std::size_t> mapping(n * k);
  std::vector<double> source(n * k);
  std::vector<double> reference(n * out_reg, 0.0);
  result.min_block_fidelity = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    const auto& block = blocks[j];
    const auto u = optimal_isometry(mu, block.target);
    const double f = protocol_fidelity(mu, block.target, u);
    result.block_fidelities.push_back(f);
    result.min_block_fidelity = std::min(result.min_block_fidelity, f);
    for (std::size_t i = 0; i < n; ++i) {
      source[i * k + j] = block.weight * mu[i];
      const std::size_t dest = u(i);
      mapping[i * k + j] = (dest / m) * out_reg + m * j + dest % m;
      for (std::size_t l = 0; l < m; ++l) reference[i * out_reg + m * j + l] = block.weight * mu[i] * block.target[l];
    }
  }
  result.isometry = PermutationIsometry{std::move(mapping), n * out_reg};
  result.fidelity = overlap(result.isometry.apply(source), reference);
  return result;
}

// ---------------------------------------------------------------------------
// Rank reduction by recursive pairing

struct RecursiveResult {
  std::size_t rank = 0;
  double fidelity = 0.0;           ///< achieved F_m
  double worst_pair_fidelity = 1.0;  ///< F: worst rank-2 step in the recursion
  double bound = 0.0;              ///< ceil(log2 m)^2 (1 - F^2)
  double margin = 0.0;             ///< bound - (1 - F_m^2)
  bool holds = true;
};

namespace detail {

struct RecursiveMap {
  PermutationIsometry map;  // mu index -> i*m + l
  double worst;
};

inline RecursiveMap recursive_embed(const SchmidtVector& mu, const TargetState& target) {
  const std::size_t m = target.rank();
  if (m == 2) {
    auto u = optimal_isometry(mu, target);
    const double f = protocol_fidelity(mu, target, u);
    return {std::move(u), f};
  }
  const std::size_t half = m / 2;
  std::vector<double> spine(half);
  std::vector<TargetState> pairs;
  pairs.reserve(half);
  for (std::size_t j = 0; j < half; ++j) {
    const double a = target[2 * j];
    const double b = target[2 * j + 1];
    spine[j] = std::sqrt(a * a + b * b);
    pairs.push_back(TargetState::normalized({a, b}));
  }
  auto inner = recursive_embed(mu, TargetState::normalized(spine));

  // Second stage: |mu>|jj> -> |mu>|phi_j> for each pair block.
  const std::size_t n = mu.dim();
  std::vector<std::size_t> stage(n * half);
  double worst = inner.worst;
  for (std::size_t j = 0; j < half; ++j) {
    const auto u = optimal_isometry(mu, pairs[j]);
    worst = std::min(worst, protocol_fidelity(mu, pairs[j], u));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t dest = u(i);
      stage[i * half + j] = (dest / 2) * m + 2 * j + dest % 2;
    }
  }
  return {inner.map.then(PermutationIsometry{std::move(stage), n * m}), worst};
}

}  // namespace detail

inline constexpr std::size_t kDenseSimulationLimit = std::size_t{1} << 16;

/// Embezzles a rank m = 2^l target by pairing adjacent coefficients,
/// embezzling the rank m/2 state of pair weights, then expanding every pair
/// in superposition. Checks 1 - F_m^2 <= ceil(log2 m)^2 (1 - F^2).
inline RecursiveResult recursive_rank_m(const SchmidtVector& mu, const TargetState& target) {
  const std::size_t m = target.rank();
  if (m < 2 || (m & (m - 1)) != 0) throw std::invalid_argument("target rank must be a power of two >= 2");
  if (!mu.sorted()) throw std::invalid_argument("source coefficients must be sorted");
  if (mu.dim() * m > kDenseSimulationLimit) throw std::invalid_argument("dense simulation limited to dim*m <= 2^16");
  const auto embedded = detail::recursive_embed(mu, target);
  RecursiveResult r;
  r.rank = m;
  r.fidelity = protocol_fidelity(mu, target, embedded.map);
  r.worst_pair_fidelity = embedded.worst;
  const double levels = std::ceil(std::log2(static_cast<double>(m)));
  r.bound = levels * levels * (1.0 - r.worst_pair_fidelity * r.worst_pair_fidelity);
  r.margin = r.bound - (1.0 - r.fidelity * r.fidelity);
  r.holds = r.margin >= -1e-12;
  return r;
}

/// Lower bound on the fidelity after substituting one state for another:
/// sqrt(1 - (sqrt(1 - F1^2) + sqrt(1 - F2^2))^2), clamped at 0.
inline double compose_bound(double f1, double f2) {
  if (!(f1 >= 0.0 && f1 <= 1.0 && f2 >= 0.0 && f2 <= 1.0)) {
    throw std::invalid_argument("fidelities must lie in [0, 1]");
  }
  const double distance = std::sqrt(1.0 - f1 * f1) + std::sqrt(1.0 - f2 * f2);
  return std::sqrt(std::max(0.0, 1.0 - distance * distance));
}

// ---------------------------------------------------------------------------
// Randomized property runs

struct PropertyReport {
  std::string lemma;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;
};

/// Independent per-trial seed (splitmix64 of root seed and trial index).
inline std::uint64_t trial_seed(std::uint64_t root, std::uint64_t trial) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace detail {

inline TargetState random_target(std::mt19937_64& rng, std::size_t rank) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<double> w(rank);
  for (double& x : w) x = unit(rng);
  return TargetState::normalized(std::move(w));
}

/// Sorted source drawn from one of the families or from random weights.
inline SchmidtVector random_source(std::mt19937_64& rng, std::size_t max_dim) {
  std::uniform_int_distribution<int> log_dim(2, static_cast<int>(std::bit_width(max_dim) - 1));
  const std::uint64_t n = std::uint64_t{1} << log_dim(rng);
  std::uniform_int_distribution<int> pick(0, 5);
  switch (pick(rng)) {
    case 0: return SchmidtVector::from_spectrum(build_spectrum(FamilySpec::fdh(), n));
    case 1: return SchmidtVector::from_spectrum(build_spectrum(FamilySpec::g(1), n));
    case 2: return SchmidtVector::from_spectrum(build_spectrum(FamilySpec::h(1), n));
    case 3: return SchmidtVector::from_spectrum(gh_spectrum(n));
    default: {
      std::exponential_distribution<double> gap(1.0);
      std::vector<double> w(n);
      double x = 1.0;
      for (auto& v : w) {
        v = x;
        x *= std::exp(-0.3 * gap(rng));
      }
      return SchmidtVector::normalized(std::move(w));
    }
  }
}

}  // namespace detail

/// Randomized check that embezzling in superposition never does worse than
/// the worst block.
inline PropertyReport superposition_trials(std::uint64_t seed, std::size_t trials, std::size_t jobs = 1) {
  std::vector<double> margins(trials);
  parallel_for_index(trials, jobs, [&](std::size_t t) {
    std::mt19937_64 rng{trial_seed(seed, t)};
    const auto mu = detail::random_source(rng, 256);
    std::uniform_int_distribution<int> count(2, 4);
    std::uniform_int_distribution<int> rank(2, 4);
    const std::size_t k = static_cast<std::size_t>(count(rng));
    const std::size_t m = static_cast<std::size_t>(rank(rng));
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::vector<double> weights(k);
    for (double& w : weights) w = unit(rng);
    const double norm = std::sqrt(std::inner_product(weights.begin(), weights.end(), weights.begin(), 0.0));
    std::vector<SuperposedBlock> blocks;
    for (std::size_t j = 0; j < k; ++j) blocks.push_back({weights[j] / norm, detail::random_target(rng, m)});
    const auto result = superposed_embezzlement(mu, blocks);
    margins[t] = result.fidelity - result.min_block_fidelity;
  });
  PropertyReport report{"superposition", trials, 0, trials ? margins.front() : 0.0};
  for (double margin : margins) {
    if (margin < -1e-12) ++report.violations;
    report.worst_margin = std::min(report.worst_margin, margin);
  }
  return report;
}

/// Randomized check of the rank-reduction bound for m in `ranks`.
inline PropertyReport rank_reduction_trials(std::uint64_t seed, std::size_t trials,
                                            const std::vector<std::size_t>& ranks = {2, 4, 8},
                                            std::size_t max_dim = 1024, std::size_t jobs = 1) {
  if (ranks.empty()) throw std::invalid_argument("rank list must not be empty");
  std::vector<double> margins(trials);
  parallel_for_index(trials, jobs, [&](std::size_t t) {
    std::mt19937_64 rng{trial_seed(seed, t)};
    const std::size_t m = ranks[t % ranks.size()];
    const auto mu = detail::random_source(rng, std::max<std::size_t>(4, max_dim / m));
    const auto result = recursive_rank_m(mu, detail::random_target(rng, m));
    margins[t] = result.margin;
  });
  PropertyReport report{"rank_reduction", trials, 0, trials ? margins.front() : 0.0};
  for (double margin : margins) {
    if (margin < -1e-12) ++report.violations;
    report.worst_margin = std::min(report.worst_margin, margin);
  }
  return report;
}

}  // namespace embezzle
