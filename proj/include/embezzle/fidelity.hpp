#pragma once

// Optimal embezzlement fidelity.
//
// For a permutation protocol the best achievable overlap pairs the i-th
// largest coefficient of mu with the i-th largest element omega_i of the
// product multiset {mu_k phi_j}. The products are produced by an m-way
// merge over m independently scaled cursors of the same spectrum, run-length
// batched, and truncated after n elements (the reference state is mu padded
// with zeros).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "embezzle/compensated_sum.hpp"
#include "embezzle/families.hpp"
#include "embezzle/parallel.hpp"
#include "embezzle/target.hpp"

namespace embezzle {

/// Streams the first `limit` products omega_1 >= omega_2 >= ... together
/// with the matching source values mu_1 >= mu_2 >= ..., both unnormalized.
///
/// visit(reference, product, count) is called once per batch of `count`
/// consecutive positions that share both values. Exactly equal products
/// from different scaled streams are taken lowest stream index first.
template <class Visitor>
void merge_products(const SpectrumSource& mu, const TargetState& target, std::uint64_t limit,
                    Visitor&& visit) {
  if (limit > mu.size()) throw std::invalid_argument("merge limit exceeds the spectrum rank");
  const auto coeffs = target.coeffs();
  const std::size_t m = coeffs.size();
  mu.with_generator([&](const auto& gen) {
    using Cursor = decltype(gen.cursor());
    Cursor reference = gen.cursor();
    std::vector<Cursor> streams;
    streams.reserve(m);
    for (std::size_t j = 0; j < m; ++j) streams.push_back(gen.cursor());

    std::uint64_t remaining = limit;
    while (remaining > 0) {
      std::size_t best = m;
      double best_value = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (streams[j].done()) continue;
        const double v = coeffs[j] * streams[j].head().value;
        if (best == m || v > best_value) {
          best = j;
          best_value = v;
        }
      }
      if (best == m || reference.done()) {
        throw ConsistencyError("scaled stream exhausted before " + std::to_string(limit) +
                               " merged elements");
      }
      const Run s = streams[best].head();
      const Run r = reference.head();
      const std::uint64_t take = std::min({s.count, r.count, remaining});
      visit(r.value, best_value, take);
      streams[best].consume(take);
      reference.consume(take);
      remaining -= take;
    }
  });
}

/// F = sum_i mu_i omega_i, normalized by the source's norm_sq.
inline double optimal_fidelity(const SpectrumSource& mu, const TargetState& target) {
  CompensatedSum overlap;
  merge_products(mu, target, mu.size(), [&](double ref, double prod, std::uint64_t count) {
    overlap += ref * prod * static_cast<double>(count);
  });
  return std::clamp(overlap.value() / mu.norm_sq(), 0.0, 1.0);
}

inline constexpr std::uint64_t kBruteForceLimit = std::uint64_t{1} << 22;

/// Validation oracle: materializes every product, sorts, and overlaps the
/// top n with mu. Accumulates in long double.
inline double brute_force_fidelity(const SpectrumSource& mu, const TargetState& target) {
  const std::uint64_t n = mu.size();
  const std::uint64_t m = target.rank();
  if (n > kBruteForceLimit / m) throw std::invalid_argument("brute force limited to n*m <= 2^22");
  const std::vector<double> values = mu.expand(kBruteForceLimit);
  std::vector<double> products;
  products.reserve(n * m);
  for (double v : values) {
    for (double phi : target.coeffs()) products.push_back(phi * v);
  }
  std::sort(products.begin(), products.end(), std::greater<>{});
  long double overlap = 0.0L;
  for (std::uint64_t i = 0; i < n; ++i) {
    overlap += static_cast<long double>(values[i]) * static_cast<long double>(products[i]);
  }
  return static_cast<double>(overlap / static_cast<long double>(mu.norm_sq()));
}

/// rho_i = omega_i / mu_i for i = 1..upto, on unnormalized values.
inline std::vector<double> ratio_profile(const SpectrumSource& mu, const TargetState& target,
                                         std::uint64_t upto) {
  if (upto > mu.size()) throw std::invalid_argument("ratio profile length exceeds the spectrum rank");
  std::vector<double> rho;
  rho.reserve(upto);
  merge_products(mu, target, upto, [&](double ref, double prod, std::uint64_t count) {
    rho.insert(rho.end(), count, prod / ref);
  });
  return rho;
}

// ---------------------------------------------------------------------------
// Sweeps

struct FidelityRecord {
  FamilySpec family;
  int level = 0;          ///< N; n = 2^N except for the sine family
  std::uint64_t n = 0;    ///< Schmidt rank of the source
  std::string target_name;
  TargetState target{{1.0}};
  double fidelity = 0.0;
  NormMethod norm_method = NormMethod::exact;
  double norm_value = 0.0;
  double elapsed_ms = 0.0;
};

/// A sweep point failed; carries the offending level.
class SweepError : public std::runtime_error {
 public:
  SweepError(int level, const std::string& what)
      : std::runtime_error("N=" + std::to_string(level) + ": " + what), level_{level} {}
  [[nodiscard]] int level() const noexcept { return level_; }

 private:
  int level_;
};

inline FidelityRecord fidelity_point(const FamilySpec& spec, const TargetState& target,
                                     const std::string& target_name, int level, NormMethod method) {
  const auto start = std::chrono::steady_clock::now();
  const SpectrumSource mu = spectrum_for_level(spec, level, method);
  FidelityRecord rec{spec, level, mu.size(), target_name, target};
  rec.fidelity = optimal_fidelity(mu, target);
  rec.norm_method = mu.norm_method();
  rec.norm_value = mu.norm_sq();
  rec.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

inline constexpr int kMaxLevel = 33;

/// One record per N in [first, last], ordered by N regardless of how many
/// worker threads computed them.
inline std::vector<FidelityRecord> fidelity_sweep(const FamilySpec& spec, const TargetState& target,
                                                  const std::string& target_name, int first, int last,
                                                  NormMethod method, std::size_t jobs = 1) {
  if (first < 1 || last > kMaxLevel || first > last) {
    throw std::invalid_argument("sweep range must lie within [1, 33]");
  }
  std::vector<FidelityRecord> out(static_cast<std::size_t>(last - first + 1));
  parallel_for_index(out.size(), jobs, [&](std::size_t i) {
    const int level = first + static_cast<int>(i);
    try {
      out[i] = fidelity_point(spec, target, target_name, level, method);
    } catch (const SweepError&) {
      throw;
    } catch (const std::exception& e) {
      throw SweepError(level, e.what());
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Sine family

namespace detail {

inline double sine_weight(int k, int levels) {
  return std::sqrt(2.0 / (levels + 1.0)) * std::sin(k * std::numbers::pi / (levels + 1.0));
}

}  // namespace detail

/// Overlap of the index-shift protocol for the state nested in the sine
/// family: (2/(N+1)) sum_{k=1}^{N-1} sin(k pi/(N+1)) sin((k+1) pi/(N+1)).
inline double sine_matched_fidelity(int levels) {
  if (levels < 1) throw std::invalid_argument("sine family requires N >= 1");
  CompensatedSum sum;
  for (int k = 1; k < levels; ++k) sum += detail::sine_weight(k, levels) * detail::sine_weight(k + 1, levels);
  return sum.value();
}

/// Fidelity of running the same shift protocol (built for the maximally
/// entangled pair) when the parties want a different rank-2 state.
///
/// Level k of the spectrum has 2^{N-k+1} coefficients of size
/// c_k 2^{-(N-k+1)/2}. The shift maps them onto level k+1 tensored with the
/// new two-dimensional register, where the reference coefficients are
/// c_{k+1} 2^{-(N-k)/2} phi_j, so each level contributes
/// c_k c_{k+1} (phi_1 + phi_2)/sqrt(2).
inline double sine_mismatched_fidelity(int levels, const TargetState& target) {
  if (target.rank() != 2) throw std::invalid_argument("mismatched sine fidelity needs a rank-2 target");
  if (levels < 1) throw std::invalid_argument("sine family requires N >= 1");
  if (levels > 62) throw std::invalid_argument("sine family limited to N <= 62");
  CompensatedSum sum;
  for (int k = 1; k < levels; ++k) {
    const int depth = levels - k + 1;
    const double source = detail::sine_weight(k, levels) * std::pow(2.0, -0.5 * depth);
    const double dest = detail::sine_weight(k + 1, levels) * std::pow(2.0, -0.5 * (depth - 1));
    const double positions = std::ldexp(1.0, depth - 1);
    sum += source * dest * positions * (target[0] + target[1]);
  }
  return sum.value();
}

/// Optimal permutation fidelity of embezzling `target` from the sine
/// spectrum (an upper bound for any fixed protocol, such as the shift).
inline double sine_optimal_fidelity(int levels, const TargetState& target) {
  return optimal_fidelity(sine_spectrum(levels), target);
}

}  // namespace embezzle
