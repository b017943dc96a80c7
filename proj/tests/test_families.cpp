#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "embezzle/families.hpp"
#include "oracle.hpp"

using namespace embezzle;

TEST(Lambda, IteratedLogarithm) {
  EXPECT_EQ(lambda_eval(0, 7.0), 7.0);
  EXPECT_DOUBLE_EQ(lambda_eval(1, 0.0), 1.0);
  EXPECT_NEAR(lambda_eval(2, 0.0), 1.3132616875182228, 1e-15);
  for (unsigned s = 0; s <= 4; ++s) EXPECT_LT(lambda_eval(s, 10.0), lambda_eval(s, 11.0));
}

TEST(RegularValue, MatchesDefinitions) {
  EXPECT_EQ(regular_value(FamilySpec::fdh(), 4), 0.5);
  EXPECT_NEAR(regular_value(FamilySpec::h(1), 1), 0.8726183928927123, 1e-15);
  EXPECT_NEAR(regular_value(FamilySpec::g(1), 2), 0.8807510187141571, 1e-15);
  for (int r = 1; r <= 3; ++r) {
    for (std::uint64_t i : {1ULL, 2ULL, 17ULL, 1000ULL, 1ULL << 40}) {
      EXPECT_NEAR(regular_value(FamilySpec::g(r), i), static_cast<double>(oracle::g(r, i)),
                  1e-14 * static_cast<double>(oracle::g(r, i)));
      EXPECT_NEAR(regular_value(FamilySpec::h(r), i), static_cast<double>(oracle::h(r, i)),
                  1e-14 * static_cast<double>(oracle::h(r, i)));
    }
  }
}

TEST(FamilySpec, ParsesAndNames) {
  for (const char* name : {"fdh", "g1", "g3", "h2", "gh", "sine"}) EXPECT_EQ(FamilySpec::parse(name).name(), name);
  EXPECT_THROW(FamilySpec::parse("g0"), std::invalid_argument);
  EXPECT_THROW(FamilySpec::parse("x"), std::invalid_argument);
  EXPECT_THROW(FamilySpec::parse("h"), std::invalid_argument);
}

TEST(BuildSpectrum, SmallFdh) {
  const auto two = build_spectrum(FamilySpec::fdh(), 2);
  const auto runs = two.runs();
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0], (embezzle::Run{1.0, 1}));
  EXPECT_NEAR(runs[1].value, std::sqrt(0.5), 1e-15);
  EXPECT_DOUBLE_EQ(two.norm_sq(), 1.5);
  EXPECT_NEAR(build_spectrum(FamilySpec::fdh(), 4).norm_sq(), 25.0 / 12.0, 1e-15);
  EXPECT_THROW(build_spectrum(FamilySpec::fdh(), 0), std::invalid_argument);
}

TEST(BuildSpectrum, G1NormNearLeadingTerm) {
  const double c = build_spectrum(FamilySpec::g(1), 1024).norm_sq();
  const double lead = std::log(1024.0) * std::log(1024.0) / 2.0;
  EXPECT_NEAR(c / lead, 1.0, 0.25);
}

TEST(BuildSpectrum, FdhNormIsHarmonicNumber) {
  for (int k : {1, 5, 12, 20}) {
    const std::uint64_t n = std::uint64_t{1} << k;
    oracle::real h = 0.0L;
    for (std::uint64_t i = n; i >= 1; --i) h += 1.0L / static_cast<oracle::real>(i);
    const double c = build_spectrum(FamilySpec::fdh(), n).norm_sq();
    EXPECT_NEAR(c / static_cast<double>(h), 1.0, 1e-9) << "n=2^" << k;
  }
}

TEST(BuildSpectrum, RunInvariantsForEveryFamily) {
  const std::uint64_t n = 1000;
  for (const auto& spec : {FamilySpec::fdh(), FamilySpec::g(1), FamilySpec::g(3), FamilySpec::h(1),
                           FamilySpec::h(3), FamilySpec::gh()}) {
    const auto src = build_spectrum(spec, n);
    std::uint64_t total = 0;
    double prev = INFINITY;
    for (const embezzle::Run& r : src.runs()) {
      EXPECT_GT(r.value, 0.0);
      EXPECT_LE(r.value, prev);
      prev = r.value;
      total += r.count;
    }
    EXPECT_EQ(total, n) << spec.name();
    EXPECT_EQ(src.size(), n);
  }
}

TEST(BuildSpectrum, GClassNormsNest) {
  const std::vector<std::uint64_t> ns{1u << 5, 1u << 10, 1u << 15, 1u << 20};
  for (int r = 1; r <= 3; ++r) {
    const auto lower = norm_checkpoints(FamilySpec::g(r), ns);
    const auto upper = norm_checkpoints(FamilySpec::g(r + 1), ns);
    for (std::size_t i = 0; i < ns.size(); ++i) EXPECT_GE(upper[i], lower[i]);
  }
}

TEST(BuildSpectrum, HClassNormTracksIteratedLog) {
  const std::vector<std::uint64_t> ns{1u << 10, 1u << 15, 1u << 20};
  for (int r = 1; r <= 3; ++r) {
    const auto c = norm_checkpoints(FamilySpec::h(r), ns);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double ratio = c[i] / lambda_eval(static_cast<unsigned>(r + 1), static_cast<double>(ns[i]));
      EXPECT_GE(ratio, 0.5);
      EXPECT_LE(ratio, 2.0);
    }
  }
}

TEST(NormCheckpoints, AgreeWithSinglePass) {
  for (const auto& spec : {FamilySpec::fdh(), FamilySpec::h(2), FamilySpec::gh()}) {
    const auto c = norm_checkpoints(spec, {1, 7, 7, 100, 4096});
    EXPECT_EQ(c[1], c[2]);
    EXPECT_EQ(c[3], build_spectrum(spec, 100).norm_sq());
    EXPECT_EQ(c[4], build_spectrum(spec, 4096).norm_sq());
  }
  EXPECT_THROW(norm_checkpoints(FamilySpec::fdh(), {5, 3}), std::invalid_argument);
  EXPECT_THROW(norm_checkpoints(FamilySpec::sine(), {4}), std::invalid_argument);
}

TEST(GhSpectrum, SmallCases) {
  const auto one = gh_spectrum(1).runs();
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(one[0].value, 0.8726183928927123, 1e-15);

  const auto three = gh_spectrum(3).expand();
  ASSERT_EQ(three.size(), 3u);
  EXPECT_NEAR(three[0], 0.8726183928927123, 1e-15);
  EXPECT_NEAR(three[1], 0.7623796911925795, 1e-15);
  EXPECT_NEAR(three[2], 0.5676973280484757, 1e-15);
  EXPECT_THROW(gh_spectrum(0), std::invalid_argument);
}

TEST(GhSpectrum, MatchesDirectRecursion) {
  const std::uint64_t n = 5000;
  auto raw = oracle::gh_raw(n);
  const double c = static_cast<double>(oracle::sum_squares(raw));
  std::sort(raw.begin(), raw.end(), std::greater<>{});
  const auto src = gh_spectrum(n);
  const auto got = src.expand();
  ASSERT_EQ(got.size(), n);
  for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(got[i], static_cast<double>(raw[i]), 1e-15) << i;
  EXPECT_NEAR(src.norm_sq(), c, 1e-13);
}

TEST(GhSpectrum, StreamedEqualsCached) {
  for (std::uint64_t n : {1ULL, 2ULL, 3ULL, 100ULL, 1ULL << 16}) {
    const auto streamed = gh_spectrum(n);
    const auto cached = gh_spectrum_cached(n);
    EXPECT_EQ(streamed.runs(), cached.runs()) << n;
    EXPECT_EQ(streamed.norm_sq(), cached.norm_sq());
  }
  EXPECT_THROW(gh_spectrum_cached((1ULL << 16) + 1), std::invalid_argument);
}

TEST(GhSpectrum, NormStaysNearLogN) {
  std::vector<std::uint64_t> ns;
  for (int k = 1; k <= 20; ++k) ns.push_back(std::uint64_t{1} << k);
  const auto c = norm_checkpoints(FamilySpec::gh(), ns);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double x = static_cast<double>(ns[i]);
    const double g = regular_value(FamilySpec::g(1), ns[i]);
    const double h = regular_value(FamilySpec::h(1), ns[i]);
    EXPECT_LE(std::abs(c[i] - std::log(x)), std::max(g * g, h * h)) << "n=" << ns[i];
  }
}

TEST(GhSpectrum, NormMethods) {
  EXPECT_THROW(gh_spectrum(1 << 17, NormMethod::ln_approx), std::invalid_argument);
  const auto approx = gh_spectrum(1 << 18, NormMethod::ln_approx);
  EXPECT_EQ(approx.norm_sq(), std::log(double(1 << 18)));
  EXPECT_EQ(approx.norm_method(), NormMethod::ln_approx);
  EXPECT_EQ(gh_spectrum(1 << 10, NormMethod::automatic).norm_method(), NormMethod::exact);
  EXPECT_EQ(resolve_norm_method(NormMethod::automatic, std::uint64_t{1} << 27), NormMethod::ln_approx);
  EXPECT_THROW(build_spectrum(FamilySpec::fdh(), 1 << 20, NormMethod::ln_approx), std::invalid_argument);
}

TEST(SineSpectrum, RunStructure) {
  const auto one = sine_spectrum(1);
  ASSERT_EQ(one.runs().size(), 1u);
  EXPECT_NEAR(one.runs()[0].value, std::sqrt(0.5), 1e-16);
  EXPECT_EQ(one.runs()[0].count, 2u);

  const auto two = sine_spectrum(2).runs();
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NEAR(two[0].value, 0.5, 1e-15);
  EXPECT_EQ(two[0].count, 2u);
  EXPECT_NEAR(two[1].value, 0.35355339059327373, 1e-15);
  EXPECT_EQ(two[1].count, 4u);

  for (int levels : {2, 7, 30}) {
    const auto src = sine_spectrum(levels);
    EXPECT_EQ(src.norm_sq(), 1.0);
    double sq = 0.0;
    std::uint64_t total = 0;
    for (const embezzle::Run& r : src.runs()) {
      sq += r.value * r.value * static_cast<double>(r.count);
      total += r.count;
    }
    EXPECT_NEAR(sq, 1.0, 1e-12);
    EXPECT_EQ(total, (std::uint64_t{2} << levels) - 2);
  }
  EXPECT_THROW(sine_spectrum(0), std::invalid_argument);
}

TEST(CheckMonotone, Families) {
  EXPECT_TRUE(check_monotone(FamilySpec::fdh(), 1'000'000).raw_monotone);
  EXPECT_TRUE(check_monotone(FamilySpec::g(3), 1'000'000).raw_monotone);
  const auto gh = check_monotone(FamilySpec::gh(), 3);
  EXPECT_TRUE(gh.output_monotone);
  EXPECT_FALSE(gh.raw_monotone);
  EXPECT_EQ(gh.first_raw_violation, 3u);
  EXPECT_TRUE(check_monotone(FamilySpec::gh(), 100'000).output_monotone);
  EXPECT_TRUE(check_monotone(FamilySpec::sine(), 1 << 10).output_monotone);
}

TEST(SpectrumSource, FromRunsCoalescesTies) {
  const auto src = SpectrumSource::from_runs(FamilySpec::fdh(), {{0.5, 1}, {1.0, 2}, {0.5, 3}});
  EXPECT_EQ(src.runs(), (std::vector<embezzle::Run>{{1.0, 2}, {0.5, 4}}));
  EXPECT_EQ(src.size(), 6u);
  EXPECT_DOUBLE_EQ(src.norm_sq(), 3.0);
  EXPECT_THROW(SpectrumSource::from_values(FamilySpec::fdh(), {1.0, -1.0}), std::invalid_argument);
}
