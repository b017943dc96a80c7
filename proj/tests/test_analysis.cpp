#include <gtest/gtest.h>

#include <cmath>

#include "embezzle/analysis.hpp"
#include "oracle.hpp"

using namespace embezzle;

TEST(Entropy, UniformIsLogRank) {
  for (std::uint64_t n : {1ULL, 2ULL, 1000ULL, 1ULL << 40}) {
    const auto src = SpectrumSource::from_runs(FamilySpec::fdh(), {{0.25, n}});
    EXPECT_NEAR(entanglement_entropy(src), std::log2(static_cast<double>(n)), 1e-12);
  }
}

TEST(Entropy, FdhPair) {
  EXPECT_NEAR(entanglement_entropy(build_spectrum(FamilySpec::fdh(), 2)), 0.9182958340544896, 1e-15);
}

TEST(Entropy, MatchesDirectSum) {
  for (const auto& spec : {FamilySpec::fdh(), FamilySpec::g(1), FamilySpec::h(1), FamilySpec::gh()}) {
    const auto src = build_spectrum(spec, 4096);
    const auto v = src.expand();
    const double direct = static_cast<double>(oracle::entropy_bits({v.begin(), v.end()}));
    EXPECT_NEAR(entanglement_entropy(src), direct, 1e-12) << spec.name();
  }
}

TEST(Entropy, InvariantUnderRunSplitting) {
  const auto coalesced = SpectrumSource::from_runs(FamilySpec::sine(), sine_spectrum(6).runs());
  std::vector<double> split = sine_spectrum(6).expand();
  const auto dense = SpectrumSource::from_values(FamilySpec::sine(), split);
  EXPECT_NEAR(entanglement_entropy(coalesced), entanglement_entropy(dense), 1e-13);
}

TEST(Entropy, WithinBounds) {
  for (const auto& src : {build_spectrum(FamilySpec::h(2), 512), gh_spectrum(999), sine_spectrum(9)}) {
    const double e = entanglement_entropy(src);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, std::log2(static_cast<double>(src.size())) + 1e-12);
  }
}

TEST(Entropy, LeadingTermPredictions) {
  EXPECT_DOUBLE_EQ(entropy_prediction(FamilySpec::fdh(), 1 << 20), 10.0);
  EXPECT_DOUBLE_EQ(entropy_prediction(FamilySpec::g(1), std::uint64_t{1} << 30), 20.0);
  EXPECT_NEAR(entropy_prediction(FamilySpec::h(1), 1 << 20), 20.0 / std::log(std::log(1048576.0)), 1e-12);
  EXPECT_NEAR(entropy_prediction(FamilySpec::h(1), 1 << 20), 7.6068206243005347, 1e-12);
  EXPECT_THROW(entropy_prediction(FamilySpec::gh(), 1 << 20), std::invalid_argument);
  EXPECT_THROW(entropy_prediction(FamilySpec::fdh(), 8), std::invalid_argument);
}

TEST(Entropy, FamiliesAtOneMillion) {
  const std::uint64_t n = 1 << 20;
  const double fdh = entanglement_entropy(build_spectrum(FamilySpec::fdh(), n));
  const double g1 = entanglement_entropy(build_spectrum(FamilySpec::g(1), n));
  const double h1 = entanglement_entropy(build_spectrum(FamilySpec::h(1), n));
  // Independent direct summations in double precision.
  EXPECT_NEAR(fdh, 13.445010786818843, 1e-9);
  EXPECT_NEAR(g1, 16.615110111949232, 1e-9);
  EXPECT_NEAR(h1, 8.6446719077101477, 1e-9);
  EXPECT_LT(h1, fdh);
  EXPECT_LT(fdh, g1);
  EXPECT_NEAR(g1 / entropy_prediction(FamilySpec::g(1), n), 1.0, 0.25);
  EXPECT_NEAR(h1 / entropy_prediction(FamilySpec::h(1), n), 1.0, 0.25);
}

TEST(Orders, FdhHalfRatio) {
  EXPECT_NEAR(order_ratio(FamilySpec::fdh(), 2, 1024), 0.9077582989188115, 1e-13);
  EXPECT_EQ(order_ratio(FamilySpec::gh(), 1, 77), 1.0);
  EXPECT_THROW(order_ratio(FamilySpec::fdh(), 0, 10), std::invalid_argument);
  EXPECT_THROW(order_ratio(FamilySpec::fdh(), 11, 10), std::invalid_argument);
}

TEST(Orders, G1HalfRatioClimbsTowardOne) {
  double prev = 0.0;
  for (int k : {10, 15, 20, 25}) {
    const double r = order_ratio(FamilySpec::g(1), 2, std::uint64_t{1} << k);
    EXPECT_GT(r, prev);
    EXPECT_LT(r, 1.0);
    prev = r;
  }
}

TEST(Orders, PredictedGrowth) {
  const auto est = order_estimates(FamilySpec::h(1), {1 << 10, 1 << 20});
  ASSERT_EQ(est.size(), 2u);
  for (const auto& e : est) {
    EXPECT_EQ(e.predicted, lambda_eval(2, static_cast<double>(e.n)));
    EXPECT_DOUBLE_EQ(e.ratio, e.measured / e.predicted);
  }
  EXPECT_EQ(predicted_order(FamilySpec::fdh(), 100), std::log(100.0));
  EXPECT_THROW(predicted_order(FamilySpec::g(2), 100), std::invalid_argument);
  EXPECT_THROW(predicted_order(FamilySpec::sine(), 100), std::invalid_argument);
}

TEST(Orders, GClassDivergence) {
  const auto one = order_divergence_check(1, {1 << 8, 1 << 16, 1 << 24});
  EXPECT_TRUE(one.all_at_least_one);
  EXPECT_TRUE(one.increasing);
  const auto single = order_divergence_check(1, {1000});
  EXPECT_GE(single.ratios.front(), 1.0);
  const auto two = order_divergence_check(2, {1 << 8, 1 << 16});
  EXPECT_TRUE(two.all_at_least_one);
  EXPECT_TRUE(two.increasing);
  EXPECT_THROW(order_divergence_check(1, {16, 8}), std::invalid_argument);
}

TEST(Mu1, FdhValues) {
  const auto decay = mu1_decay(FamilySpec::fdh(), {4, 8, 12});
  ASSERT_EQ(decay.points.size(), 3u);
  const double expected[] = {0.5438696458959071, 0.404082625675731, 0.3352930006171353};
  for (int i = 0; i < 3; ++i) {
    oracle::real h = 0.0L;
    for (std::uint64_t k = std::uint64_t{1} << decay.points[i].level; k >= 1; --k) h += 1.0L / k;
    EXPECT_NEAR(decay.points[i].mu1, 1.0 / std::sqrt(static_cast<double>(h)), 1e-15);
    EXPECT_NEAR(decay.points[i].mu1, expected[i], 1e-14);
  }
  EXPECT_TRUE(decay.strictly_decreasing);
}

TEST(Mu1, DecreasingForEveryFamily) {
  for (const auto& spec : {FamilySpec::g(2), FamilySpec::h(1), FamilySpec::gh(), FamilySpec::sine()}) {
    const auto d = mu1_decay(spec, {3, 6, 10, 14});
    EXPECT_TRUE(d.strictly_decreasing) << spec.name();
    for (const auto& p : d.points) EXPECT_LE(p.mu1, 1.0);
  }
  const auto gh = mu1_decay(FamilySpec::gh(), {10, 20});
  EXPECT_LT(gh.points[1].mu1, gh.points[0].mu1);
}

TEST(Scaling, HClassRatioApproachesOne) {
  double prev = INFINITY;
  for (double x : {std::ldexp(1.0, 10), std::ldexp(1.0, 20), std::ldexp(1.0, 30)}) {
    const double d = std::abs(scaling_ratio(FamilySpec::h(1), 2.0, 1.0, x) - 1.0);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_THROW(scaling_ratio(FamilySpec::fdh(), 2.0, 1.0, 10.0), std::invalid_argument);
}
