#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "embezzle/io.hpp"

using namespace embezzle;

TEST(Targets, NamedAndCustom) {
  EXPECT_EQ(io::parse_target("phi+"), targets::phi_plus());
  EXPECT_NEAR(io::parse_target("phi+")[0], 2.0 / std::sqrt(5.0), 1e-16);
  EXPECT_NEAR(io::parse_target("phi*")[1], 1.0 / std::sqrt(std::numbers::pi), 1e-16);
  EXPECT_NEAR(io::parse_target("phio")[1], std::sqrt(0.5), 1e-16);
  EXPECT_EQ(io::parse_target("one").rank(), 1u);
  EXPECT_EQ(io::parse_target("3:2:1"), TargetState::normalized({3, 2, 1}));
  EXPECT_THROW(io::parse_target("phi-"), std::invalid_argument);
  EXPECT_THROW(io::parse_target("1:x"), std::invalid_argument);
  EXPECT_EQ(io::parse_target("1:2"), io::parse_target("2:1"));  // weights are sorted
  EXPECT_THROW(io::parse_target("0:1"), std::invalid_argument);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 0.94227914906473, 2.718281828459045e-300}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
}

TEST(Csv, SweepRoundTrip) {
  const auto recs = fidelity_sweep(FamilySpec::gh(), targets::phi_plus(), "phi+", 2, 6, NormMethod::exact);
  std::stringstream s;
  io::write_sweep_csv(s, recs);
  std::string header;
  std::getline(s, header);
  EXPECT_EQ(header, io::kSweepHeader);
  s.seekg(0);
  const auto rows = io::read_sweep_csv(s);
  ASSERT_EQ(rows.size(), recs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].family, "gh");
    EXPECT_EQ(rows[i].level, recs[i].level);
    EXPECT_EQ(rows[i].n, recs[i].n);
    EXPECT_EQ(rows[i].fidelity, recs[i].fidelity);
    EXPECT_EQ(rows[i].norm_value, recs[i].norm_value);
    EXPECT_EQ(rows[i].norm_method, "exact");
    EXPECT_EQ(rows[i].elapsed_ms, 0.0);
  }
}

TEST(Csv, RejectsMalformedInput) {
  std::stringstream bad_header("a,b,c\n");
  EXPECT_THROW(io::read_sweep_csv(bad_header), std::runtime_error);
  std::stringstream short_row(std::string(io::kSweepHeader) + "\nfdh,3,8\n");
  EXPECT_THROW(io::read_sweep_csv(short_row), std::runtime_error);
  std::stringstream bad_number(std::string(io::kSweepHeader) + "\nfdh,x,8,phio,0.9,exact,1,0\n");
  EXPECT_THROW(io::read_sweep_csv(bad_number), std::runtime_error);
}

TEST(FitReport, GroupsSeriesAndCrosses) {
  std::vector<io::SweepRow> rows;
  for (int n = 5; n <= 20; ++n) {
    const double x = n;
    rows.push_back({"fdh", n, 0, "phio", 0.999960 - 0.565744 / x + 0.418400 / (x * x), "exact", 0, 0});
    rows.push_back({"gh", n, 0, "phio", 0.9974 - 0.1971 / x - 0.6862 / (x * x), "exact", 0, 0});
  }
  const auto j = io::fit_report(rows, 10, 5, 20);
  ASSERT_EQ(j["fits"].size(), 2u);
  EXPECT_NEAR(j["fits"][0]["model"]["a"].get<double>(), 0.999960, 1e-9);
  EXPECT_EQ(j["fits"][0]["window"][0], 10);
  EXPECT_EQ(j["fits"][0]["sensitivity"].size(), 14u);  // n0 = 5..18 leave >= 3 levels
  ASSERT_EQ(j["crossovers"].size(), 1u);
  EXPECT_NEAR(j["crossovers"][0]["N"].get<double>(), 140.9400888, 1e-5);
}
