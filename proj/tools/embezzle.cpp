// embezzle: command-line runner for spectra, fidelity sweeps, analysis
// reports, protocol property runs and fits.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "embezzle/embezzle.hpp"
#include "embezzle/io.hpp"

namespace {

using namespace embezzle;

constexpr int kExitUsage = 1;
constexpr int kExitCompute = 2;
constexpr int kLongRunLevel = 30;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LevelRange {
  int first = 0;
  int last = 0;
};

LevelRange parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const int v = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const std::string lo = text.substr(0, dots);
    const std::string hi = text.substr(dots + 2);
    LevelRange r{std::stoi(lo, &used), 0};
    if (used != lo.size()) throw std::invalid_argument(text);
    r.last = std::stoi(hi, &used);
    if (used != hi.size() || r.first > r.last) throw std::invalid_argument(text);
    return r;
  } catch (const std::logic_error&) {
    throw UsageError("malformed range '" + text + "' (expected A..B)");
  }
}

std::vector<int> levels_of(const LevelRange& r) {
  std::vector<int> out;
  for (int n = r.first; n <= r.last; ++n) out.push_back(n);
  return out;
}

/// Output sink: --out path, else $EMBEZZLE_OUT_DIR/<default_name>, else stdout.
class Output {
 public:
  Output(const std::string& path, const std::string& default_name) {
    std::string target = path;
    if (target.empty()) {
      if (const char* dir = std::getenv("EMBEZZLE_OUT_DIR"); dir != nullptr && *dir != '\0') {
        target = (std::filesystem::path(dir) / default_name).string();
      }
    }
    if (!target.empty()) {
      file_.open(target, std::ios::binary | std::ios::trunc);
      if (!file_) throw UsageError("cannot write output file '" + target + "'");
      path_ = target;
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void finish() {
    stream().flush();
    if (file_.is_open() && !file_) throw UsageError("failed writing '" + path_ + "'");
  }

 private:
  std::ofstream file_;
  std::string path_;
};

struct Common {
  std::string out;
  std::size_t jobs = 1;
  bool timing = false;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("-o,--out", common.out, "output file (default: $EMBEZZLE_OUT_DIR or stdout)");
  cmd->add_option("-j,--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--timing", common.timing, "write measured elapsed_ms instead of 0");
}

std::vector<FamilySpec> parse_families(const std::vector<std::string>& names) {
  std::vector<FamilySpec> out;
  for (const auto& n : names) {
    try {
      out.push_back(FamilySpec::parse(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

std::vector<std::pair<std::string, TargetState>> parse_targets(const std::vector<std::string>& names) {
  std::vector<std::pair<std::string, TargetState>> out;
  for (const auto& n : names) {
    try {
      out.emplace_back(n, io::parse_target(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

/// Refuses levels above 30 unless allowed; prints a rough ETA otherwise.
void guard_long_run(const std::vector<FamilySpec>& families, std::size_t targets, const LevelRange& range,
                    bool allow_long, std::size_t jobs) {
  if (range.last < 1 || range.last > kMaxLevel || range.first < 1) throw UsageError("N range must lie within [1, 33]");
  if (range.last <= kLongRunLevel) return;
  if (!allow_long) throw UsageError("N > 30 needs --allow-long (2^N-element merges take minutes each)");
  constexpr int probe = 18;
  double seconds = 0.0;
  for (const auto& f : families) {
    if (f.kind == FamilyKind::sine) continue;
    const auto t0 = std::chrono::steady_clock::now();
    (void)fidelity_point(f, targets::phi_circ(), "probe", probe, NormMethod::automatic);
    const double probe_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (int n = std::max(range.first, probe); n <= range.last; ++n) seconds += probe_s * std::ldexp(1.0, n - probe);
  }
  seconds *= static_cast<double>(targets) / static_cast<double>(std::max<std::size_t>(1, jobs));
  std::fprintf(stderr, "long run: estimated %.0f min\n", seconds / 60.0);
}

std::vector<FidelityRecord> run_sweeps(const std::vector<FamilySpec>& families,
                                       const std::vector<std::pair<std::string, TargetState>>& targets,
                                       const LevelRange& range, const std::vector<NormMethod>& norms, std::size_t jobs) {
  struct Task {
    FamilySpec family;
    std::size_t target;
    NormMethod norm;
    int level;
  };
  std::vector<Task> tasks;
  for (const auto& f : families) {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      for (NormMethod norm : norms) {
        if (norm == NormMethod::ln_approx && f.kind != FamilyKind::gh) continue;
        for (int n = range.first; n <= range.last; ++n) tasks.push_back({f, t, norm, n});
      }
    }
  }
  std::vector<FidelityRecord> out(tasks.size());
  parallel_for_index(tasks.size(), jobs, [&](std::size_t i) {
    const auto& task = tasks[i];
    try {
      out[i] = fidelity_point(task.family, targets[task.target].second, targets[task.target].first, task.level,
                              task.norm);
    } catch (const std::exception& e) {
      throw SweepError(task.level, task.family.name() + "/" + targets[task.target].first + ": " + e.what());
    }
  });
  return out;
}

std::vector<NormMethod> parse_norms(const std::string& text) {
  if (text == "both") return {NormMethod::exact, NormMethod::ln_approx};
  try {
    return {parse_norm_method(text)};
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string optional_cell(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string{}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embezzling-family spectra, optimal fidelities and fits"};
  app.set_config("--config", "", "line-based key = value file; command-line flags override it");
  app.require_subcommand(1);

  // coeffs
  Common coeffs_common;
  std::string coeffs_family = "fdh";
  std::uint64_t coeffs_n = 16;
  std::size_t coeffs_top = 10;
  std::string coeffs_norm = "exact";
  auto* coeffs = app.add_subcommand("coeffs", "print the leading runs and norm of a spectrum");
  coeffs->add_option("--family", coeffs_family, "fdh, g<r>, h<r>, gh, sine");
  coeffs->add_option("--n", coeffs_n, "Schmidt rank n (number of levels N for sine)")->check(CLI::PositiveNumber);
  coeffs->add_option("--top", coeffs_top, "number of runs to print");
  coeffs->add_option("--norm", coeffs_norm, "exact, ln, auto (GH only)");
  add_common(coeffs, coeffs_common);

  // sweep
  Common sweep_common;
  std::vector<std::string> sweep_families{"fdh"};
  std::vector<std::string> sweep_targets{"phio"};
  std::string sweep_range = "3..10";
  std::string sweep_norm = "auto";
  bool sweep_long = false;
  auto* sweep = app.add_subcommand("sweep", "optimal fidelity over n = 2^N");
  sweep->add_option("--family", sweep_families, "families (repeatable)");
  sweep->add_option("--target", sweep_targets, "phi+, phi*, phio, one, or w1:w2:... (repeatable)");
  sweep->add_option("--n", sweep_range, "level range A..B, n = 2^N");
  sweep->add_option("--norm", sweep_norm, "exact, ln, auto, both (GH normalization)");
  sweep->add_flag("--allow-long", sweep_long, "permit N > 30");
  add_common(sweep, sweep_common);

  // entropy
  Common entropy_common;
  std::vector<std::string> entropy_families{"fdh", "g1", "h1"};
  std::string entropy_range = "4..20";
  auto* entropy = app.add_subcommand("entropy", "entanglement entropy against leading-term estimates");
  entropy->add_option("--family", entropy_families, "families (repeatable)");
  entropy->add_option("--n", entropy_range, "level range A..B, n = 2^N");
  add_common(entropy, entropy_common);

  // orders
  Common orders_common;
  std::vector<std::string> orders_families{"fdh", "g1", "h1", "h2", "h3", "gh"};
  std::string orders_range = "4..20";
  auto* orders = app.add_subcommand("orders", "normalization growth, half ratios, mu_1 decay, G-class divergence");
  orders->add_option("--family", orders_families, "families (repeatable)");
  orders->add_option("--n", orders_range, "level range A..B, n = 2^N");
  add_common(orders, orders_common);

  // ratios
  Common ratios_common;
  std::vector<std::string> ratios_families{"fdh"};
  std::string ratios_target = "phio";
  std::vector<std::uint64_t> ratios_at;
  std::uint64_t ratios_upto = 0;
  auto* ratios = app.add_subcommand("ratios", "omega_i / mu_i profile");
  ratios->add_option("--family", ratios_families, "families (repeatable)");
  ratios->add_option("--target", ratios_target, "target state");
  ratios->add_option("--upto", ratios_upto, "emit every i = 1..k");
  ratios->add_option("--at", ratios_at, "emit only these indices (repeatable)");
  add_common(ratios, ratios_common);

  // protocol
  Common protocol_common;
  std::uint64_t protocol_seed = 1;
  std::size_t protocol_trials = 100;
  auto* protocol = app.add_subcommand("protocol", "randomized superposition and rank-reduction property runs");
  protocol->add_option("--seed", protocol_seed, "root seed");
  protocol->add_option("--trials", protocol_trials, "trials per property");
  add_common(protocol, protocol_common);

  // fit
  Common fit_common;
  std::vector<std::string> fit_inputs;
  int fit_n0 = 10;
  std::string fit_scan = "5..20";
  auto* fit = app.add_subcommand("fit", "least-squares a + b/N + c/N^2 fits of sweep CSVs");
  fit->add_option("--input", fit_inputs, "sweep CSV files (repeatable)")->required();
  fit->add_option("--n0", fit_n0, "first level in the fit window");
  fit->add_option("--scan", fit_scan, "starting-level range for the sensitivity scan");
  add_common(fit, fit_common);

  // figure1
  Common fig_common;
  std::string fig_range = "3..26";
  bool fig_long = false;
  auto* figure1 = app.add_subcommand("figure1", "GH and FDH against phi+, phi*, phio");
  figure1->add_option("--n", fig_range, "level range A..B");
  figure1->add_flag("--allow-long", fig_long, "permit N > 30");
  add_common(figure1, fig_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*coeffs) {
      const auto family = parse_families({coeffs_family}).front();
      const auto norm = parse_norms(coeffs_norm).front();
      const auto source = family.kind == FamilyKind::sine ? sine_spectrum(static_cast<int>(coeffs_n), family.sine_rank)
                                                          : build_spectrum(family, coeffs_n, norm);
      Output out{coeffs_common.out, "coeffs.csv"};
      auto& os = out.stream();
      os << "# family=" << family.name() << " n=" << source.size() << " norm_sq=" << io::format_double(source.norm_sq())
         << " norm_method=" << to_string(source.norm_method()) << '\n';
      os << "run,value,count,normalized\n";
      const double scale = 1.0 / std::sqrt(source.norm_sq());
      std::size_t k = 0;
      for (const Run& r : source.runs(coeffs_top)) {
        os << ++k << ',' << io::format_double(r.value) << ',' << r.count << ',' << io::format_double(r.value * scale)
           << '\n';
      }
      out.finish();
    } else if (*sweep) {
      const auto families = parse_families(sweep_families);
      const auto targets = parse_targets(sweep_targets);
      const auto range = parse_range(sweep_range);
      guard_long_run(families, targets.size(), range, sweep_long, sweep_common.jobs);
      const auto records = run_sweeps(families, targets, range, parse_norms(sweep_norm), sweep_common.jobs);
      Output out{sweep_common.out, "sweep.csv"};
      io::write_sweep_csv(out.stream(), records, sweep_common.timing);
      out.finish();
    } else if (*figure1) {
      const auto families = parse_families({"gh", "fdh"});
      const auto targets = parse_targets({"phi+", "phi*", "phio"});
      const auto range = parse_range(fig_range);
      guard_long_run(families, targets.size(), range, fig_long, fig_common.jobs);
      const auto records = run_sweeps(families, targets, range, {NormMethod::automatic}, fig_common.jobs);
      Output out{fig_common.out, "figure1.csv"};
      io::write_sweep_csv(out.stream(), records, fig_common.timing);
      out.finish();
    } else if (*entropy) {
      const auto families = parse_families(entropy_families);
      const auto range = parse_range(entropy_range);
      Output out{entropy_common.out, "entropy.csv"};
      auto& os = out.stream();
      os << "family,N,n,entropy_bits,prediction_bits,ratio\n";
      for (const auto& f : families) {
        for (int level : levels_of(range)) {
          const auto source = spectrum_for_level(f, level);
          const double ent = entanglement_entropy(source);
          std::optional<double> pred;
          try {
            if (source.size() >= 16) pred = entropy_prediction(f, source.size());
          } catch (const std::invalid_argument&) {
          }
          os << f.name() << ',' << level << ',' << source.size() << ',' << io::format_double(ent) << ','
             << optional_cell(pred) << ',' << optional_cell(pred ? std::optional(ent / *pred) : std::nullopt) << '\n';
        }
      }
      out.finish();
    } else if (*orders) {
      const auto families = parse_families(orders_families);
      const auto range = parse_range(orders_range);
      if (range.first < 1 || range.last > 40) throw UsageError("orders range must lie within [1, 40]");
      const auto levels = levels_of(range);
      std::vector<std::uint64_t> ns;
      for (int l : levels) ns.push_back(std::uint64_t{1} << l);
      Output out{orders_common.out, "orders.csv"};
      auto& os = out.stream();
      os << "kind,family,N,n,measured,predicted,ratio\n";
      for (const auto& f : families) {
        if (f.kind == FamilyKind::sine) {
          for (const auto& p : mu1_decay(f, levels).points) {
            os << "mu1," << f.name() << ',' << p.level << ',' << sine_spectrum(p.level).size() << ','
               << io::format_double(p.mu1) << ",,\n";
          }
          continue;
        }
        const auto norms = norm_checkpoints(f, ns);
        for (std::size_t i = 0; i < ns.size(); ++i) {
          std::optional<double> pred;
          try {
            pred = predicted_order(f, ns[i]);
          } catch (const std::invalid_argument&) {
          }
          os << "order," << f.name() << ',' << levels[i] << ',' << ns[i] << ',' << io::format_double(norms[i]) << ','
             << optional_cell(pred) << ',' << optional_cell(pred ? std::optional(norms[i] / *pred) : std::nullopt)
             << '\n';
        }
        for (std::size_t i = 0; i < ns.size(); ++i) {
          if (ns[i] < 2) continue;
          os << "half," << f.name() << ',' << levels[i] << ',' << ns[i] << ','
             << io::format_double(order_ratio(f, 2, ns[i])) << ",,\n";
        }
        for (const auto& p : mu1_decay(f, levels).points) {
          os << "mu1," << f.name() << ',' << p.level << ',' << (std::uint64_t{1} << p.level) << ','
             << io::format_double(p.mu1) << ',' << io::format_double(maximally_entangled_gap_bound(p.mu1)) << ",\n";
        }
        if (f.kind == FamilyKind::g) {
          const auto div = order_divergence_check(f.r, ns);
          for (std::size_t i = 0; i < ns.size(); ++i) {
            os << "divergence,g" << f.r + 1 << "/g" << f.r << ',' << levels[i] << ',' << ns[i] << ','
               << io::format_double(div.ratios[i]) << ",,\n";
          }
        }
      }
      out.finish();
    } else if (*ratios) {
      const auto families = parse_families(ratios_families);
      const auto target = parse_targets({ratios_target}).front();
      std::vector<std::uint64_t> indices = ratios_at;
      for (std::uint64_t i = 1; i <= ratios_upto; ++i) indices.push_back(i);
      if (indices.empty()) throw UsageError("ratios needs --upto or --at");
      std::sort(indices.begin(), indices.end());
      indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
      if (indices.front() == 0) throw UsageError("ratio indices start at 1");
      Output out{ratios_common.out, "ratios.csv"};
      auto& os = out.stream();
      os << "family,target,i,rho\n";
      for (const auto& f : families) {
        if (f.kind == FamilyKind::sine) throw UsageError("ratio profiles need a regular or GH family");
        // Prefix-stable: the spectrum only needs to reach the largest index.
        const auto source = build_spectrum(f, indices.back());
        const auto rho = ratio_profile(source, target.second, indices.back());
        for (std::uint64_t i : indices) os << f.name() << ',' << target.first << ',' << i << ',' << io::format_double(rho[i - 1]) << '\n';
      }
      out.finish();
    } else if (*protocol) {
      nlohmann::json report = nlohmann::json::array();
      report.push_back(io::to_json(superposition_trials(protocol_seed, protocol_trials, protocol_common.jobs)));
      report.push_back(io::to_json(rank_reduction_trials(protocol_seed, protocol_trials, {2, 4, 8}, 1024, protocol_common.jobs)));
      Output out{protocol_common.out, "protocol.json"};
      out.stream() << nlohmann::json{{"seed", protocol_seed}, {"reports", report}}.dump(2) << '\n';
      out.finish();
    } else if (*fit) {
      std::vector<io::SweepRow> rows;
      for (const auto& path : fit_inputs) {
        std::ifstream in{path};
        if (!in) throw UsageError("cannot read '" + path + "'");
        auto more = io::read_sweep_csv(in);
        rows.insert(rows.end(), more.begin(), more.end());
      }
      if (rows.empty()) throw UsageError("no data rows in the input CSVs");
      const auto scan = parse_range(fit_scan);
      Output out{fit_common.out, "fit.json"};
      out.stream() << io::fit_report(rows, fit_n0, scan.first, scan.last).dump(2) << '\n';
      out.finish();
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return 0;
}
