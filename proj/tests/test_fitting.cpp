#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "embezzle/fitting.hpp"

using namespace embezzle;

namespace {

std::vector<FitPoint> synthetic(double a, double b, double c, int first, int last) {
  std::vector<FitPoint> pts;
  for (int n = first; n <= last; ++n) pts.push_back({double(n), a + b / n + c / (double(n) * n)});
  return pts;
}

FitModel model(double a, double b, double c, int last = 33) {
  FitModel m;
  m.a = a;
  m.b = b;
  m.c = c;
  m.first_level = 10;
  m.last_level = last;
  return m;
}

}  // namespace

TEST(Fit, RecoversExactModel) {
  const auto f = fit_inverse_poly(synthetic(1.0, -0.5, 0.1, 1, 10), 1);
  EXPECT_NEAR(f.a, 1.0, 1e-10);
  EXPECT_NEAR(f.b, -0.5, 1e-10);
  EXPECT_NEAR(f.c, 0.1, 1e-10);
  EXPECT_EQ(f.points, 10u);
  EXPECT_LT(f.rms_residual, 1e-12);
}

TEST(Fit, ThreePointsInterpolate) {
  const std::vector<FitPoint> pts{{3, 0.9}, {5, 0.7}, {9, 0.95}};
  const auto f = fit_inverse_poly(pts, 3);
  for (const auto& p : pts) EXPECT_NEAR(f(p.level), p.fidelity, 1e-12);
  EXPECT_LT(f.rms_residual, 1e-12);
}

TEST(Fit, WindowAndSingularity) {
  auto pts = synthetic(0.99, -0.3, 0.2, 3, 20);
  const auto f = fit_inverse_poly(pts, 18);
  EXPECT_EQ(f.points, 3u);
  EXPECT_EQ(f.first_level, 18);
  EXPECT_EQ(f.last_level, 20);
  EXPECT_THROW(fit_inverse_poly(pts, 19), std::invalid_argument);
  EXPECT_THROW(fit_inverse_poly({{4, 0.1}, {4, 0.2}, {5, 0.3}}, 1), std::invalid_argument);
}

TEST(Fit, ResidualsOrthogonalToBasis) {
  std::mt19937_64 rng{5};
  std::normal_distribution<double> noise(0.0, 1e-4);
  auto pts = synthetic(0.998, -0.08, -0.6, 5, 26);
  for (auto& p : pts) p.fidelity += noise(rng);
  const auto f = fit_inverse_poly(pts, 5);
  double dots[3] = {0, 0, 0};
  for (const auto& p : pts) {
    const double r = p.fidelity - f(p.level);
    dots[0] += r;
    dots[1] += r / p.level;
    dots[2] += r / (p.level * p.level);
  }
  for (double d : dots) EXPECT_NEAR(d, 0.0, 1e-9);
}

TEST(Fit, OrderIndependent) {
  auto pts = synthetic(0.97, 0.2, -1.0, 4, 30);
  pts[3].fidelity += 1e-3;
  const auto f1 = fit_inverse_poly(pts, 4);
  std::reverse(pts.begin(), pts.end());
  std::shuffle(pts.begin(), pts.end(), std::mt19937_64{9});
  const auto f2 = fit_inverse_poly(pts, 4);
  EXPECT_NEAR(f1.a, f2.a, 1e-12);
  EXPECT_NEAR(f1.b, f2.b, 1e-10);
  EXPECT_NEAR(f1.c, f2.c, 1e-9);
}

TEST(Sensitivity, ConstantDataHasNoSpread) {
  std::vector<FitPoint> pts;
  for (int n = 3; n <= 26; ++n) pts.push_back({double(n), 0.95});
  const auto s = sensitivity_scan(pts, 5, 20);
  EXPECT_EQ(s.fits.size(), 16u);
  // Late windows (N0 = 20 on 20..26) make the normal equations stiff.
  EXPECT_NEAR(s.spread_a, 0.0, 1e-10);
  EXPECT_NEAR(s.spread_b, 0.0, 1e-8);
  EXPECT_NEAR(s.spread_c, 0.0, 1e-6);
  EXPECT_THROW(sensitivity_scan(pts, 6, 5), std::invalid_argument);
}

TEST(Crossover, PublishedCoefficientPairs) {
  const FitModel gh[] = {model(0.9980, -0.0759, -0.6358), model(0.9976, -0.1395, -0.6691),
                         model(0.9974, -0.1971, -0.6862)};
  const FitModel fdh[] = {model(0.999982, -0.377165, 0.282380), model(0.999970, -0.484107, 0.359519),
                          model(0.999960, -0.565744, 0.418400)};
  const double expected[] = {148.88906493, 142.35496488, 140.9400888};
  for (int i = 0; i < 3; ++i) {
    const auto n = crossover(gh[i], fdh[i]);
    ASSERT_TRUE(n.has_value());
    EXPECT_NEAR(*n, expected[i], 1e-6);
    EXPECT_NEAR(gh[i](*n), fdh[i](*n), 1e-12);
  }
}

TEST(Crossover, NoCrossing) {
  const auto m = model(0.99, -0.1, 0.2);
  EXPECT_FALSE(crossover(m, m).has_value());
  EXPECT_FALSE(crossover(model(0.995, -0.1, 0.2), m).has_value());
  // The only root lies inside the window.
  EXPECT_FALSE(crossover(model(1.0, -0.2, 0.0, 33), model(0.99, 0.0, 0.0, 33)).has_value());
}
