#pragma once

// Schmidt-coefficient spectra of bipartite embezzling families.
//
// Every family is exposed as a SpectrumSource: a description from which any
// number of independent, single-consumer cursors can be opened. Each cursor
// yields the unnormalized coefficients as non-increasing runs
// (value, multiplicity), generated lazily so that spectra of rank 2^33 never
// need to be materialized.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "embezzle/compensated_sum.hpp"

namespace embezzle {

/// Raised when a generator breaks its own ordering or counting contract.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FamilyKind { fdh, g, h, gh, sine };

/// Declarative description of an embezzling family.
///
/// `r` is the class of the G and H families. `sine_rank` is the rank of the
/// equal-coefficient state nested inside the sine family (2 for the
/// maximally entangled pair).
struct FamilySpec {
  FamilyKind kind = FamilyKind::fdh;
  int r = 0;
  int sine_rank = 2;

  static FamilySpec fdh() { return {FamilyKind::fdh, 0, 2}; }
  static FamilySpec g(int r) { return checked({FamilyKind::g, r, 2}); }
  static FamilySpec h(int r) { return checked({FamilyKind::h, r, 2}); }
  static FamilySpec gh() { return {FamilyKind::gh, 0, 2}; }
  static FamilySpec sine(int rank = 2) { return checked({FamilyKind::sine, 0, rank}); }

  [[nodiscard]] bool is_regular() const noexcept {
    return kind == FamilyKind::fdh || kind == FamilyKind::g || kind == FamilyKind::h;
  }

  /// Short name used on the command line and in CSV output: fdh, g2, h1, gh, sine.
  [[nodiscard]] std::string name() const {
    switch (kind) {
      case FamilyKind::fdh: return "fdh";
      case FamilyKind::g: return "g" + std::to_string(r);
      case FamilyKind::h: return "h" + std::to_string(r);
      case FamilyKind::gh: return "gh";
      case FamilyKind::sine: return sine_rank == 2 ? "sine" : "sine" + std::to_string(sine_rank);
    }
    return "?";
  }

  /// Inverse of name(). Throws std::invalid_argument on unknown names.
  static FamilySpec parse(std::string_view text) {
    auto number = [&](std::string_view digits) -> int {
      if (digits.empty() || digits.size() > 3 ||
          !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw std::invalid_argument("unknown family '" + std::string(text) + "'");
      }
      return std::stoi(std::string(digits));
    };
    if (text == "fdh") return fdh();
    if (text == "gh") return gh();
    if (text == "sine") return sine();
    if (text.starts_with("sine")) return sine(number(text.substr(4)));
    if (text.starts_with("g")) return g(number(text.substr(1)));
    if (text.starts_with("h")) return h(number(text.substr(1)));
    throw std::invalid_argument("unknown family '" + std::string(text) + "'");
  }

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;

 private:
  static FamilySpec checked(FamilySpec spec) {
    if ((spec.kind == FamilyKind::g || spec.kind == FamilyKind::h) && spec.r < 1) {
      throw std::invalid_argument("G and H families require class r >= 1");
    }
    if (spec.kind == FamilyKind::sine && spec.sine_rank < 2) {
      throw std::invalid_argument("sine family requires a nested state of rank >= 2");
    }
    return spec;
  }
};

/// How the normalization constant of a GH spectrum is obtained.
enum class NormMethod {
  exact,      ///< compensated sum of squares over the whole spectrum
  ln_approx,  ///< ln n, allowed for n >= 2^18
  automatic,  ///< exact up to 2^26, ln n above
};

inline std::string_view to_string(NormMethod m) {
  switch (m) {
    case NormMethod::exact: return "exact";
    case NormMethod::ln_approx: return "ln_approx";
    case NormMethod::automatic: return "auto";
  }
  return "?";
}

inline NormMethod parse_norm_method(std::string_view text) {
  if (text == "exact") return NormMethod::exact;
  if (text == "ln" || text == "ln_approx") return NormMethod::ln_approx;
  if (text == "auto") return NormMethod::automatic;
  throw std::invalid_argument("unknown norm method '" + std::string(text) + "'");
}

inline constexpr std::uint64_t kLnApproxMinSize = std::uint64_t{1} << 18;
inline constexpr std::uint64_t kAutoExactMaxSize = std::uint64_t{1} << 26;
inline constexpr std::uint64_t kCachedGhMaxSize = std::uint64_t{1} << 16;

// ---------------------------------------------------------------------------
// Generator functions

/// lambda^s(x) with lambda(x) = ln(x + e), applied s times left to right.
inline double lambda_eval(unsigned s, double x) {
  for (unsigned k = 0; k < s; ++k) x = std::log(x + std::numbers::e);
  return x;
}

namespace detail {

/// prod_{s=1}^r lambda^s(x)
inline double lambda_product(int r, double x) {
  double p = 1.0;
  double l = x;
  for (int s = 1; s <= r; ++s) {
    l = std::log(l + std::numbers::e);
    p *= l;
  }
  return p;
}

inline double g1_from_log(double x, double l) { return std::sqrt(l / x); }
inline double h1_from_log(double x, double l) { return 1.0 / std::sqrt(x * l); }

}  // namespace detail

/// Unnormalized f(i) of a regular family (FDH, G_r, H_r).
inline double regular_value(const FamilySpec& spec, std::uint64_t i) {
  const double x = static_cast<double>(i);
  switch (spec.kind) {
    case FamilyKind::fdh: return 1.0 / std::sqrt(x);
    case FamilyKind::g:
      if (spec.r == 1) return detail::g1_from_log(x, std::log(x + std::numbers::e));
      return std::sqrt(detail::lambda_product(spec.r, x) / x);
    case FamilyKind::h:
      if (spec.r == 1) return detail::h1_from_log(x, std::log(x + std::numbers::e));
      return 1.0 / std::sqrt(x * detail::lambda_product(spec.r, x));
    default: throw std::invalid_argument("regular_value requires an FDH, G or H family");
  }
}

/// One step of the adaptive gh sequence: H_1(x) while the running
/// normalization has reached ln x, G_1(x) otherwise.
struct GhWalker {
  std::uint64_t x = 0;
  CompensatedSum norm;

  struct Step {
    double value;
    bool h_branch;
  };

  Step next() {
    ++x;
    const double xd = static_cast<double>(x);
    const bool h_branch = x == 1 || norm.value() >= std::log(xd);
    const double l = std::log(xd + std::numbers::e);
    const double v = h_branch ? detail::h1_from_log(xd, l) : detail::g1_from_log(xd, l);
    norm += v * v;
    return {v, h_branch};
  }
};

// ---------------------------------------------------------------------------
// Runs and cursors

struct Run {
  double value = 0.0;
  std::uint64_t count = 0;

  friend bool operator==(const Run&, const Run&) = default;
};

/// Cursor over f(1..n) of a regular family. Runs have multiplicity one.
class RegularCursor {
 public:
  RegularCursor(FamilySpec spec, std::uint64_t n) : spec_{spec}, n_{n} { load(); }

  [[nodiscard]] bool done() const noexcept { return i_ > n_; }
  [[nodiscard]] Run head() const noexcept { return {value_, 1}; }
  void consume(std::uint64_t k) {
    i_ += k;
    load();
  }

 private:
  void load() {
    if (!done()) value_ = regular_value(spec_, i_);
  }

  FamilySpec spec_;
  std::uint64_t n_;
  std::uint64_t i_ = 1;
  double value_ = 0.0;
};

/// Values of one branch of the gh sequence, in index order. Each branch is
/// individually decreasing; the cursor runs its own forward pass so that no
/// state is shared with the other branch.
class GhBranchCursor {
 public:
  GhBranchCursor(std::uint64_t n, bool h_branch) : n_{n}, h_branch_{h_branch} { advance(); }

  [[nodiscard]] bool done() const noexcept { return done_; }
  [[nodiscard]] double value() const noexcept { return value_; }
  void advance() {
    while (walker_.x < n_) {
      const auto step = walker_.next();
      if (step.h_branch == h_branch_) {
        value_ = step.value;
        return;
      }
    }
    done_ = true;
  }

 private:
  std::uint64_t n_;
  bool h_branch_;
  GhWalker walker_;
  double value_ = 0.0;
  bool done_ = false;
};

/// GH spectrum in non-increasing order: two-way merge of the H- and
/// G-selected branches. Exactly equal heads are coalesced into one run.
class GhCursor {
 public:
  explicit GhCursor(std::uint64_t n) : h_{n, true}, g_{n, false} {}

  [[nodiscard]] bool done() const noexcept { return h_.done() && g_.done(); }

  [[nodiscard]] Run head() const noexcept {
    if (h_.done()) return {g_.value(), 1};
    if (g_.done()) return {h_.value(), 1};
    if (h_.value() == g_.value()) return {h_.value(), 2};
    return {std::max(h_.value(), g_.value()), 1};
  }

  void consume(std::uint64_t k) {
    while (k-- > 0) {
      if (h_.done()) {
        g_.advance();
      } else if (g_.done() || h_.value() >= g_.value()) {
        h_.advance();
      } else {
        g_.advance();
      }
    }
  }

 private:
  GhBranchCursor h_;
  GhBranchCursor g_;
};

/// Cursor over an explicit run table.
class TableCursor {
 public:
  explicit TableCursor(std::shared_ptr<const std::vector<Run>> runs) : runs_{std::move(runs)} {
    if (!runs_->empty()) remaining_ = (*runs_)[0].count;
  }

  [[nodiscard]] bool done() const noexcept { return index_ >= runs_->size(); }
  [[nodiscard]] Run head() const noexcept { return {(*runs_)[index_].value, remaining_}; }
  void consume(std::uint64_t k) {
    remaining_ -= k;
    if (remaining_ == 0 && ++index_ < runs_->size()) remaining_ = (*runs_)[index_].count;
  }

 private:
  std::shared_ptr<const std::vector<Run>> runs_;
  std::size_t index_ = 0;
  std::uint64_t remaining_ = 0;
};

// ---------------------------------------------------------------------------
// SpectrumSource

/// A monotone, run-length-encoded spectrum plus its normalization constant.
///
/// Cheap to copy. Cursors opened by with_cursor() are independent of each
/// other and of the source.
class SpectrumSource {
 public:
  struct RegularGenerator {
    FamilySpec spec;
    std::uint64_t n;
    [[nodiscard]] RegularCursor cursor() const { return {spec, n}; }
  };
  struct GhGenerator {
    std::uint64_t n;
    [[nodiscard]] GhCursor cursor() const { return GhCursor{n}; }
  };
  struct TableGenerator {
    std::shared_ptr<const std::vector<Run>> runs;
    [[nodiscard]] TableCursor cursor() const { return TableCursor{runs}; }
  };
  using Generator = std::variant<RegularGenerator, GhGenerator, TableGenerator>;

  SpectrumSource(FamilySpec family, Generator generator, std::uint64_t size, double norm_sq,
                 NormMethod norm_method)
      : family_{family},
        generator_{std::move(generator)},
        size_{size},
        norm_sq_{norm_sq},
        norm_method_{norm_method} {
    if (size_ == 0) throw std::invalid_argument("spectrum must have rank >= 1");
    if (!(norm_sq_ > 0.0) || !std::isfinite(norm_sq_)) {
      throw ConsistencyError("spectrum normalization must be positive");
    }
  }

  /// Builds a source directly from runs (sorted and coalesced here).
  static SpectrumSource from_runs(FamilySpec family, std::vector<Run> runs,
                                  std::optional<double> norm_sq = std::nullopt) {
    std::erase_if(runs, [](const Run& r) { return r.count == 0; });
    std::stable_sort(runs.begin(), runs.end(),
                     [](const Run& a, const Run& b) { return a.value > b.value; });
    std::vector<Run> merged;
    std::uint64_t total = 0;
    CompensatedSum sq;
    for (const Run& r : runs) {
      if (!(r.value > 0.0) || !std::isfinite(r.value)) {
        throw std::invalid_argument("spectrum values must be positive and finite");
      }
      if (!merged.empty() && merged.back().value == r.value) {
        merged.back().count += r.count;
      } else {
        merged.push_back(r);
      }
      if (total > std::numeric_limits<std::uint64_t>::max() - r.count) {
        throw std::invalid_argument("spectrum rank overflows 64 bits");
      }
      total += r.count;
      sq += r.value * r.value * static_cast<double>(r.count);
    }
    if (merged.empty()) throw std::invalid_argument("spectrum must have rank >= 1");
    auto table = std::make_shared<const std::vector<Run>>(std::move(merged));
    return SpectrumSource{family, TableGenerator{std::move(table)}, total,
                          norm_sq.value_or(sq.value()), NormMethod::exact};
  }

  /// Builds a source from a dense coefficient list (any order).
  static SpectrumSource from_values(FamilySpec family, const std::vector<double>& values) {
    std::vector<Run> runs;
    runs.reserve(values.size());
    for (double v : values) runs.push_back({v, 1});
    return from_runs(family, std::move(runs));
  }

  [[nodiscard]] const FamilySpec& family() const noexcept { return family_; }
  [[nodiscard]] std::uint64_t size() const noexcept { return size_; }
  [[nodiscard]] double norm_sq() const noexcept { return norm_sq_; }
  [[nodiscard]] NormMethod norm_method() const noexcept { return norm_method_; }
  [[nodiscard]] const Generator& generator() const noexcept { return generator_; }

  /// Calls fn(generator) with the concrete generator; generator.cursor()
  /// opens a fresh stream. Keeps the per-element loop free of virtual calls.
  template <class Fn>
  decltype(auto) with_generator(Fn&& fn) const {
    return std::visit([&](const auto& gen) -> decltype(auto) { return fn(gen); }, generator_);
  }

  /// Same spectrum with a different normalization constant.
  [[nodiscard]] SpectrumSource renormalized(double norm_sq, NormMethod method) const {
    return SpectrumSource{family_, generator_, size_, norm_sq, method};
  }

  /// First `max_runs` runs (all when omitted).
  [[nodiscard]] std::vector<Run> runs(std::size_t max_runs = std::numeric_limits<std::size_t>::max()) const {
    return with_generator([&](const auto& gen) {
      std::vector<Run> out;
      auto c = gen.cursor();
      while (!c.done() && out.size() < max_runs) {
        const Run r = c.head();
        out.push_back(r);
        c.consume(r.count);
      }
      return out;
    });
  }

  /// Dense unnormalized coefficients in non-increasing order.
  [[nodiscard]] std::vector<double> expand(std::uint64_t guard = std::uint64_t{1} << 24) const {
    if (size_ > guard) throw std::invalid_argument("spectrum too large to expand");
    std::vector<double> out;
    out.reserve(size_);
    for (const Run& r : runs()) out.insert(out.end(), r.count, r.value);
    return out;
  }

  /// Largest normalized coefficient mu_1.
  [[nodiscard]] double mu1() const { return runs(1).front().value / std::sqrt(norm_sq_); }

 private:
  FamilySpec family_;
  Generator generator_;
  std::uint64_t size_;
  double norm_sq_;
  NormMethod norm_method_;
};

// ---------------------------------------------------------------------------
// Construction

namespace detail {

/// C(f, n) for a regular family, checking monotonicity on the way.
inline double regular_norm(const FamilySpec& spec, std::uint64_t n) {
  CompensatedSum sum;
  double prev = std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 1; i <= n; ++i) {
    const double v = regular_value(spec, i);
    if (!(v > 0.0) || v > prev) {
      throw ConsistencyError(spec.name() + " values are not positive and non-increasing at i=" +
                             std::to_string(i));
    }
    prev = v;
    sum += v * v;
  }
  return sum.value();
}

/// C(gh, n), checking that both branches are individually non-increasing.
inline double gh_norm(std::uint64_t n) {
  GhWalker walker;
  double prev_h = std::numeric_limits<double>::infinity();
  double prev_g = prev_h;
  while (walker.x < n) {
    const auto step = walker.next();
    double& prev = step.h_branch ? prev_h : prev_g;
    if (!(step.value > 0.0) || step.value > prev) {
      throw ConsistencyError("gh branch values are not non-increasing at x=" + std::to_string(walker.x));
    }
    prev = step.value;
  }
  return walker.norm.value();
}

}  // namespace detail

inline NormMethod resolve_norm_method(NormMethod method, std::uint64_t n) {
  if (method == NormMethod::automatic) {
    return n <= kAutoExactMaxSize ? NormMethod::exact : NormMethod::ln_approx;
  }
  return method;
}

/// GH spectrum of rank n, streamed with O(1) memory.
inline SpectrumSource gh_spectrum(std::uint64_t n, NormMethod method = NormMethod::exact) {
  if (n == 0) throw std::invalid_argument("spectrum rank n must be >= 1");
  method = resolve_norm_method(method, n);
  double norm_sq = 0.0;
  if (method == NormMethod::ln_approx) {
    if (n < kLnApproxMinSize) {
      throw std::invalid_argument("ln n normalization is only permitted for n >= 2^18");
    }
    norm_sq = std::log(static_cast<double>(n));
  } else {
    norm_sq = detail::gh_norm(n);
  }
  return SpectrumSource{FamilySpec::gh(), SpectrumSource::GhGenerator{n}, n, norm_sq, method};
}

/// GH spectrum materialized by a single forward pass and a sort. Must agree
/// exactly with gh_spectrum(n).
inline SpectrumSource gh_spectrum_cached(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("spectrum rank n must be >= 1");
  if (n > kCachedGhMaxSize) throw std::invalid_argument("cached GH spectrum is limited to n <= 2^16");
  GhWalker walker;
  std::vector<Run> runs;
  runs.reserve(n);
  while (walker.x < n) runs.push_back({walker.next().value, 1});
  return SpectrumSource::from_runs(FamilySpec::gh(), std::move(runs), walker.norm.value());
}

/// Sine family with N nested levels. Level k contributes the value
/// c_k * m^{-(N-k+1)/2} with multiplicity m^{N-k+1}, where
/// c_k = sqrt(2/(N+1)) sin(k pi/(N+1)) and m is the nested state's rank.
inline SpectrumSource sine_spectrum(int levels, int rank = 2) {
  if (levels < 1) throw std::invalid_argument("sine family requires N >= 1");
  const auto spec = FamilySpec::sine(rank);
  const double scale = std::sqrt(2.0 / (levels + 1.0));
  std::vector<Run> runs;
  for (int k = 1; k <= levels; ++k) {
    const int depth = levels - k + 1;
    std::uint64_t mult = 1;
    for (int d = 0; d < depth; ++d) {
      if (mult > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(rank)) {
        throw std::invalid_argument("sine spectrum rank overflows 64 bits");
      }
      mult *= static_cast<std::uint64_t>(rank);
    }
    const double ck = scale * std::sin(k * std::numbers::pi / (levels + 1.0));
    runs.push_back({ck * std::pow(static_cast<double>(rank), -0.5 * depth), mult});
  }
  // The family is normalized by construction.
  return SpectrumSource::from_runs(spec, std::move(runs), 1.0);
}

/// Spectrum of a regular or GH family at rank n.
inline SpectrumSource build_spectrum(const FamilySpec& spec, std::uint64_t n,
                                     NormMethod method = NormMethod::exact) {
  if (n == 0) throw std::invalid_argument("spectrum rank n must be >= 1");
  switch (spec.kind) {
    case FamilyKind::gh: return gh_spectrum(n, method);
    case FamilyKind::sine: {
      if ((n & (n - 1)) != 0) throw std::invalid_argument("sine family requires n = 2^N");
      return sine_spectrum(std::countr_zero(n), spec.sine_rank);
    }
    default: break;
  }
  if (method == NormMethod::ln_approx) {
    throw std::invalid_argument("ln n normalization applies to the GH family only");
  }
  return SpectrumSource{spec, SpectrumSource::RegularGenerator{spec, n}, n,
                        detail::regular_norm(spec, n), NormMethod::exact};
}

/// Spectrum for an N-level sweep point: rank 2^N for regular and GH families,
/// N nested levels for the sine family.
inline SpectrumSource spectrum_for_level(const FamilySpec& spec, int level,
                                         NormMethod method = NormMethod::exact) {
  if (level < 1 || level > 62) throw std::invalid_argument("level N must lie in [1, 62]");
  if (spec.kind == FamilyKind::sine) return sine_spectrum(level, spec.sine_rank);
  return build_spectrum(spec, std::uint64_t{1} << level, method);
}

/// C(f, n) at each of the (ascending) ranks in `ns`, from one forward pass.
/// Defined for regular families and GH, whose prefixes do not depend on n.
inline std::vector<double> norm_checkpoints(const FamilySpec& spec, const std::vector<std::uint64_t>& ns) {
  if (!std::is_sorted(ns.begin(), ns.end())) throw std::invalid_argument("checkpoints must be ascending");
  std::vector<double> out;
  out.reserve(ns.size());
  if (ns.empty()) return out;
  auto it = ns.begin();
  while (it != ns.end() && *it == 0) {
    out.push_back(0.0);
    ++it;
  }
  if (spec.kind == FamilyKind::gh) {
    GhWalker walker;
    while (it != ns.end()) {
      walker.next();
      while (it != ns.end() && *it == walker.x) {
        out.push_back(walker.norm.value());
        ++it;
      }
    }
  } else if (spec.is_regular()) {
    CompensatedSum sum;
    for (std::uint64_t i = 1; it != ns.end(); ++i) {
      const double v = regular_value(spec, i);
      sum += v * v;
      while (it != ns.end() && *it == i) {
        out.push_back(sum.value());
        ++it;
      }
    }
  } else {
    throw std::invalid_argument("norm checkpoints require a regular or GH family");
  }
  return out;
}

struct MonotoneReport {
  bool output_monotone = true;          ///< the emitted (sorted) stream is non-increasing
  bool raw_monotone = true;             ///< f(1..n) in index order is non-increasing
  std::optional<std::uint64_t> first_raw_violation;  ///< 1-based index i with f(i) > f(i-1)
};

/// Checks the generated sequence of a family at rank n.
inline MonotoneReport check_monotone(const FamilySpec& spec, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("spectrum rank n must be >= 1");
  MonotoneReport report;
  double prev = std::numeric_limits<double>::infinity();
  if (spec.is_regular()) {
    for (std::uint64_t i = 1; i <= n; ++i) {
      const double v = regular_value(spec, i);
      if (v > prev && report.raw_monotone) {
        report.raw_monotone = false;
        report.first_raw_violation = i;
      }
      prev = v;
    }
    report.output_monotone = report.raw_monotone;
    return report;
  }
  if (spec.kind == FamilyKind::gh) {
    GhWalker walker;
    while (walker.x < n) {
      const double v = walker.next().value;
      if (v > prev && report.raw_monotone) {
        report.raw_monotone = false;
        report.first_raw_violation = walker.x;
      }
      prev = v;
    }
    GhCursor cursor{n};
    prev = std::numeric_limits<double>::infinity();
    while (!cursor.done()) {
      const Run r = cursor.head();
      if (r.value > prev) report.output_monotone = false;
      prev = r.value;
      cursor.consume(r.count);
    }
    return report;
  }
  // Sine: the run table is emitted sorted.
  const auto source = build_spectrum(spec, n);
  for (const Run& r : source.runs()) {
    if (r.value > prev) report.output_monotone = false;
    prev = r.value;
  }
  report.raw_monotone = report.output_monotone;
  return report;
}

}  // namespace embezzle
