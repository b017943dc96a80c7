#pragma once

// Named targets, sweep CSV files and fit reports.

#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "embezzle/families.hpp"
#include "embezzle/fidelity.hpp"
#include "embezzle/fitting.hpp"
#include "embezzle/protocol.hpp"
#include "embezzle/target.hpp"

namespace embezzle::io {

/// 17 significant digits: round-trips every binary64 value.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// phi+, phi*, phio, one, or custom weights written "w1:w2:..." (normalized).
inline TargetState parse_target(std::string_view name) {
  if (name == "phi+") return targets::phi_plus();
  if (name == "phi*") return targets::phi_star();
  if (name == "phio") return targets::phi_circ();
  if (name == "one") return targets::product();
  std::vector<double> weights;
  std::string token;
  std::istringstream in{std::string(name)};
  while (std::getline(in, token, ':')) {
    std::size_t used = 0;
    double w = 0.0;
    try {
      w = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size()) throw std::invalid_argument("unknown target '" + std::string(name) + "'");
    weights.push_back(w);
  }
  if (weights.empty()) throw std::invalid_argument("unknown target '" + std::string(name) + "'");
  return TargetState::normalized(std::move(weights));
}

inline constexpr std::string_view kSweepHeader = "family,N,n,target,fidelity,norm_method,norm_value,elapsed_ms";

/// Writes records in the given order. elapsed_ms is written as 0 unless
/// `timing` is set, which keeps repeated runs byte-identical.
inline void write_sweep_csv(std::ostream& out, const std::vector<FidelityRecord>& records, bool timing = false) {
  out << kSweepHeader << '\n';
  for (const auto& r : records) {
    out << r.family.name() << ',' << r.level << ',' << r.n << ',' << r.target_name << ',' << format_double(r.fidelity)
        << ',' << to_string(r.norm_method) << ',' << format_double(r.norm_value) << ','
        << format_double(timing ? r.elapsed_ms : 0.0) << '\n';
  }
}

struct SweepRow {
  std::string family;
  int level = 0;
  std::uint64_t n = 0;
  std::string target;
  double fidelity = 0.0;
  std::string norm_method;
  double norm_value = 0.0;
  double elapsed_ms = 0.0;
};

inline std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("sweep CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepHeader) throw std::runtime_error("unexpected sweep CSV header: " + line);
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream fields{line};
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw std::runtime_error("line " + std::to_string(lineno) + ": expected 8 columns");
    try {
      rows.push_back({cells[0], std::stoi(cells[1]), std::stoull(cells[2]), cells[3], std::stod(cells[4]), cells[5],
                      std::stod(cells[6]), std::stod(cells[7])});
    } catch (const std::logic_error&) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Fit reports

inline nlohmann::json to_json(const FitModel& f) {
  return {{"model", {{"a", f.a}, {"b", f.b}, {"c", f.c}}},
          {"window", {f.first_level, f.last_level}},
          {"points", f.points},
          {"rms", f.rms_residual}};
}

/// Fits every (family, target, norm_method) series in the rows, with a
/// sensitivity scan over starting levels [scan_first, scan_last] where the
/// series is long enough, and the GH-vs-FDH crossover per target.
inline nlohmann::json fit_report(const std::vector<SweepRow>& rows, int first_level, int scan_first, int scan_last) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<FitPoint>> series;
  for (const auto& r : rows) series[{r.family, r.target, r.norm_method}].push_back({double(r.level), r.fidelity});

  nlohmann::json fits = nlohmann::json::array();
  std::map<std::string, std::map<std::string, FitModel>> by_target;
  for (const auto& [key, points] : series) {
    const auto& [family, target, norm] = key;
    const FitModel model = fit_inverse_poly(points, first_level);
    nlohmann::json entry = to_json(model);
    entry["family"] = family;
    entry["target"] = target;
    entry["norm_method"] = norm;
    nlohmann::json sens = nlohmann::json::array();
    std::size_t usable = 0;
    for (int n0 = scan_first; n0 <= scan_last; ++n0) {
      std::set<double> distinct;
      for (const auto& p : points) {
        if (p.level >= n0) distinct.insert(p.level);
      }
      if (distinct.size() < 3) break;
      ++usable;
    }
    if (usable > 0) {
      const auto scan = sensitivity_scan(points, scan_first, scan_first + static_cast<int>(usable) - 1);
      for (std::size_t i = 0; i < scan.fits.size(); ++i) {
        auto s = to_json(scan.fits[i]);
        s["n0"] = scan_first + static_cast<int>(i);
        sens.push_back(std::move(s));
      }
      entry["spread"] = {{"a", scan.spread_a}, {"b", scan.spread_b}, {"c", scan.spread_c}};
    }
    entry["sensitivity"] = std::move(sens);
    fits.push_back(std::move(entry));
    // Exact normalization wins when a family has both.
    auto& slot = by_target[target];
    if (!slot.contains(family) || norm == "exact") slot[family] = model;
  }

  nlohmann::json crossings = nlohmann::json::array();
  for (const auto& [target, families] : by_target) {
    if (!families.contains("gh") || !families.contains("fdh")) continue;
    const auto n = crossover(families.at("gh"), families.at("fdh"));
    crossings.push_back({{"target", target}, {"families", {"gh", "fdh"}}, {"N", n ? nlohmann::json(*n) : nlohmann::json()}});
  }
  return {{"first_level", first_level}, {"fits", std::move(fits)}, {"crossovers", std::move(crossings)}};
}

inline nlohmann::json to_json(const PropertyReport& r) {
  return {{"lemma", r.lemma}, {"trials", r.trials}, {"violations", r.violations}, {"worst_margin", r.worst_margin}};
}

}  // namespace embezzle::io
