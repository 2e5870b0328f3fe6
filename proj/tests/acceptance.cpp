// Acceptance gate: every release-blocking behavior checked end to end, one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpwilcox/experiments.hpp"
#include "dpwilcox/privacy.hpp"
#include "dpwilcox/ranks.hpp"
#include "dpwilcox/reference.hpp"
#include "dpwilcox/rng.hpp"
#include "dpwilcox/tc.hpp"
#include "dpwilcox/types.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace dpwilcox;

namespace {

int g_failures = 0;

void require(bool condition, const std::string& what) {
  if (!condition) throw std::runtime_error(what);
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

void require_close(double actual, double expected, double abs_tol, const std::string& what) {
  require(std::isfinite(actual) && std::abs(actual - expected) <= abs_tol,
          what + ": got " + num(actual) + ", expected " + num(expected) + " +/- " +
              num(abs_tol));
}

void require_rel(double actual, double expected, double rel_tol, const std::string& what) {
  require(std::isfinite(actual) &&
              std::abs(actual - expected) <= rel_tol * std::abs(expected),
          what + ": got " + num(actual) + ", expected " + num(expected) + " +/- " +
              num(rel_tol * 100) + "%");
}

void require_between(double actual, double lo, double hi, const std::string& what) {
  require(actual >= lo && actual <= hi, what + ": got " + num(actual) + ", expected in [" +
                                            num(lo) + ", " + num(hi) + "]");
}

template <typename Body>
void criterion(const char* label, Body&& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string error;
  try {
    body();
  } catch (const std::exception& e) {
    error = e.what();
  } catch (...) {
    error = "unknown exception";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (error.empty()) {
    std::printf("PASS  %-58s (%.1fs)\n", label, secs);
  } else {
    ++g_failures;
    std::printf("FAIL  %-58s (%.1fs)\n      %s\n", label, secs, error.c_str());
  }
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// Small-domain enumeration helpers for the sensitivity criterion. A row with
// values in {0,1,2,3} is characterized for ranking purposes by its
// (magnitude, sign) profile, so enumerating profile multisets covers every
// dataset; the raw per-row enumeration below cross-checks that reduction.

constexpr std::array<std::pair<double, int>, 7> kRowProfiles = {{
    {0.0, 0}, {1.0, 1}, {1.0, -1}, {2.0, 1}, {2.0, -1}, {3.0, 1}, {3.0, -1},
}};

PairedDataset dataset_from_profiles(const std::array<int, 7>& counts, Eigen::Index n) {
  PairedDataset data{Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
  Eigen::Index row = 0;
  for (std::size_t t = 0; t < kRowProfiles.size(); ++t) {
    const auto [d, s] = kRowProfiles[t];
    for (int i = 0; i < counts[t]; ++i, ++row) {
      data.u[row] = s < 0 ? d : 0.0;
      data.v[row] = s < 0 ? 0.0 : d;
    }
  }
  return data;
}

std::map<std::array<int, 7>, double> all_profile_statistics(int n) {
  std::map<std::array<int, 7>, double> w_of;
  std::array<int, 7> counts{};
  std::function<void(std::size_t, int)> fill = [&](std::size_t type, int remaining) {
    if (type + 1 == counts.size()) {
      counts[type] = remaining;
      w_of[counts] = pratt_statistic(dataset_from_profiles(counts, n));
      counts[type] = 0;
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[type] = c;
      fill(type + 1, remaining - c);
    }
    counts[type] = 0;
  };
  fill(0, n);
  return w_of;
}

double max_profile_neighbor_gap(const std::map<std::array<int, 7>, double>& w_of) {
  double worst = 0.0;
  for (const auto& [counts, w] : w_of) {
    for (std::size_t a = 0; a < counts.size(); ++a) {
      if (counts[a] == 0) continue;
      for (std::size_t b = 0; b < counts.size(); ++b) {
        if (b == a) continue;
        std::array<int, 7> moved = counts;
        --moved[a];
        ++moved[b];
        worst = std::max(worst, std::abs(w - w_of.at(moved)));
      }
    }
  }
  return worst;
}

PairedDataset dataset_from_digits(std::uint32_t idx, int n) {
  PairedDataset data{Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
  for (int r = 0; r < n; ++r) {
    const std::uint32_t digit = (idx >> (4 * r)) & 15u;
    data.u[r] = static_cast<double>(digit >> 2);
    data.v[r] = static_cast<double>(digit & 3u);
  }
  return data;
}

double max_raw_neighbor_gap(int n) {
  const std::uint32_t total = 1u << (4 * n);
  std::vector<double> w(total);
  for (std::uint32_t idx = 0; idx < total; ++idx) {
    w[idx] = pratt_statistic(dataset_from_digits(idx, n));
  }
  double worst = 0.0;
  for (std::uint32_t idx = 0; idx < total; ++idx) {
    for (int r = 0; r < n; ++r) {
      const std::uint32_t old_digit = (idx >> (4 * r)) & 15u;
      const std::uint32_t base = idx - (old_digit << (4 * r));
      for (std::uint32_t alt = 0; alt < 16; ++alt) {
        if (alt == old_digit) continue;
        const double gap = std::abs(w[idx] - w[base + (alt << (4 * r))]);
        require(gap <= 2.0 * n + 1e-12,
                "single-row change at n=" + std::to_string(n) + " moved the statistic by " +
                    num(gap));
        worst = std::max(worst, gap);
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Command reruns for the reproducibility criterion.

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string run_cli(const std::string& cli, const std::string& args, const fs::path& out,
                    const fs::path& errlog) {
  const std::string command =
      "\"" + cli + "\" " + args + " > \"" + out.string() + "\" 2>> \"" + errlog.string() + "\"";
  const int rc = std::system(command.c_str());
  require(rc == 0, "command exited with status " + std::to_string(rc) + ": " + args);
  return slurp(out);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }
  if (cli.empty()) {
    std::fprintf(stderr, "usage: %s --cli <path-to-command-line-binary>\n", argv[0]);
    return 2;
  }

  criterion("worked example: drop-zeros and zero-inclusive statistics", [] {
    const PairedDataset data = oracles::worked_example();
    const WilcoxonResult classic = wilcoxon_statistic(data);
    require(classic.w == 8.0, "drop-zeros statistic: got " + num(classic.w) + ", expected 8");
    require(classic.n_r == 4, "nonzero-row count: got " + std::to_string(classic.n_r));
    require(pratt_statistic(data) == 10.0,
            "zero-inclusive statistic: got " + num(pratt_statistic(data)) + ", expected 10");
    const RankedTable table = rank_table(data, true);
    const std::vector<RankedRow> expect = {
        {0.0, 0, 1.0}, {1.0, -1, 2.0}, {2.0, 1, 3.0}, {9.0, 1, 4.5}, {9.0, 1, 4.5}};
    require(table.rows.size() == expect.size(), "ranked table size");
    for (std::size_t i = 0; i < expect.size(); ++i) {
      require(table.rows[i].d == expect[i].d && table.rows[i].s == expect[i].s &&
                  table.rows[i].r == expect[i].r,
              "ranked table row " + std::to_string(i + 1));
    }
  });

  criterion("statistic moves at most 2n under any single-row change", [] {
    const auto start = std::chrono::steady_clock::now();
    for (int n = 1; n <= 6; ++n) {
      const auto w_of = all_profile_statistics(n);
      const double worst = max_profile_neighbor_gap(w_of);
      require(worst <= 2.0 * n + 1e-12, "profile enumeration at n=" + std::to_string(n) +
                                            ": worst change " + num(worst));
      require(worst == 2.0 * n, "bound not tight at n=" + std::to_string(n) +
                                    ": worst change " + num(worst));
      if (n <= 4) {
        const double raw = max_raw_neighbor_gap(n);
        require(raw == worst, "raw enumeration disagrees with profile reduction at n=" +
                                  std::to_string(n));
      }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 60.0, "enumeration took " + num(secs) + "s, budget 60s");
  });

  criterion("exact null distribution over sign flips at n=5", [] {
    const auto pmf = oracles::exact_sign_null_pmf(5);
    const std::array<double, 5> d = {1, 2, 3, 4, 5};
    std::map<long long, double> lib;
    for (std::uint32_t mask = 0; mask < 32; ++mask) {
      PairedDataset data{Eigen::ArrayXd(5), Eigen::ArrayXd(5)};
      for (int i = 0; i < 5; ++i) {
        data.u[i] = 0.0;
        data.v[i] = (mask >> i) & 1u ? d[i] : -d[i];
      }
      lib[std::llround(pratt_statistic(data))] += 0.03125;
    }
    require(lib.size() == pmf.size(), "support size: got " + std::to_string(lib.size()) +
                                          ", expected " + std::to_string(pmf.size()));
    double mean = 0.0;
    double var = 0.0;
    for (const auto& [w, p] : pmf) {
      const auto it = lib.find(w);
      require(it != lib.end() && it->second == p,
              "probability of w=" + std::to_string(w) + " disagrees with enumeration");
      const auto mirror = pmf.find(-w);
      require(mirror != pmf.end() && mirror->second == p,
              "null distribution not symmetric at w=" + std::to_string(w));
      mean += static_cast<double>(w) * p;
      var += static_cast<double>(w) * static_cast<double>(w) * p;
    }
    require(std::abs(mean) < 1e-12, "null mean: got " + num(mean));
    require(std::abs(var - 55.0) < 1e-9, "null variance: got " + num(var) + ", expected 55");
  });

  criterion("analytic tail-bound thresholds match published values", [] {
    const struct {
      Eigen::Index n;
      double epsilon;
      double expect;
    } pins[] = {
        {100, 1.0, 3.091},  {100, 0.1, 15.197},  {100, 0.01, 136.254},
        {1000, 1.0, 2.174}, {1000, 0.1, 6.028},  {1000, 0.01, 44.568},
    };
    for (const auto& pin : pins) {
      const double cv =
          tc_analytic_critical_value(pin.n, pin.n, pin.epsilon, 0.05, 0.01, true);
      require_close(cv, pin.expect, 0.001,
                    "analytic threshold at n=" + std::to_string(pin.n) +
                        ", epsilon=" + num(pin.epsilon));
    }
  });

  criterion("simulated critical values reproduce published quantiles", [] {
    struct Pin {
      double alpha;
      Sidedness sidedness;
      bool normalized;
      double expect;
    };
    struct Cell {
      Eigen::Index n;
      double epsilon;
      std::vector<Pin> pins;
    };
    const std::vector<Cell> cells = {
        {100, 1.0,
         {{0.05, Sidedness::one_sided, true, 1.826},
          {0.05, Sidedness::two_sided, false, 1271.0}}},
        {100, 0.1, {{0.05, Sidedness::one_sided, true, 8.063}}},
        {100, 0.01, {{0.05, Sidedness::one_sided, true, 79.233}}},
        {1000, 1.0, {{0.05, Sidedness::two_sided, false, 36235.0}}},
    };
    const struct {
      std::int64_t c;
      double rel;
    } rounds[] = {{10'000'000, 0.01}, {1'000'000, 0.03}};
    for (const auto& round : rounds) {
      for (const auto& cell : cells) {
        const auto start = std::chrono::steady_clock::now();
        const ReferenceDistribution ref =
            simulate_reference(cell.n, cell.epsilon, round.c, 10061, 0);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (round.c == 1'000'000) {
          require(secs < 120.0, "reference at n=" + std::to_string(cell.n) +
                                    " took " + num(secs) + "s, budget 120s");
        }
        for (const auto& pin : cell.pins) {
          const double cv =
              critical_value(ref, pin.alpha, pin.sidedness, pin.normalized).value;
          require_rel(cv, pin.expect, round.rel,
                      "quantile at n=" + std::to_string(cell.n) + ", epsilon=" +
                          num(cell.epsilon) + ", c=" + std::to_string(round.c));
        }
      }
    }
  });

  criterion("power reaches its design level at the published sizes", [] {
    const auto power_at = [](TestKind kind, Eigen::Index n, Sidedness sidedness,
                             std::int64_t trials, std::uint64_t seed) {
      PowerConfig cfg;
      cfg.test = kind;
      cfg.n = n;
      cfg.sidedness = sidedness;
      cfg.trials = trials;
      cfg.seed = seed;
      return estimate_power(cfg).power;
    };
    require_between(power_at(TestKind::new_test, 32, Sidedness::two_sided, 10000, 601),
                    0.75, 0.85, "private test at n=32, epsilon=1");
    require_between(power_at(TestKind::public_test, 14, Sidedness::one_sided, 10000, 602),
                    0.73, 0.87, "non-private test at n=14");
    require_between(
        power_at(TestKind::tc_high_utility, 80, Sidedness::two_sided, 10000, 603), 0.73,
        0.87, "assumed-bound baseline at n=80, epsilon=1");
    require_between(
        power_at(TestKind::tc_high_privacy, 122, Sidedness::two_sided, 20000, 604), 0.73,
        0.87, "dummy-pair baseline at n=122, epsilon=1");
  });

  criterion("null p-values are uniform, and heavy ties only add conservatism", [] {
    const auto start = std::chrono::steady_clock::now();
    for (const double tie : {0.0, 0.3}) {
      const UniformityReport report =
          pvalue_uniformity(500, 1.0, tie, 10000, 1'000'000, 701, 0.05, 0);
      require(report.max_abs_deviation < 0.02,
              "p-value deviation at tie fraction " + num(tie) + ": " +
                  num(report.max_abs_deviation));
    }
    const UniformityReport heavy =
        pvalue_uniformity(500, 1.0, 0.9, 10000, 1'000'000, 702, 0.05, 0);
    require(heavy.min_signed_deviation >= -0.005,
            "p-values fell below uniform at tie fraction 0.9 by " +
                num(-heavy.min_signed_deviation));
    require(heavy.rejection_rate <= 0.05,
            "rejection rate at tie fraction 0.9: " + num(heavy.rejection_rate));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 600.0, "uniformity sweep took " + num(secs) + "s, budget 600s");
  });

  criterion("every test holds its size under the null", [] {
    ReferenceCache refs(801, 1'000'000, 0);
    const TestKind kinds[] = {TestKind::new_test,
                              TestKind::public_test,
                              TestKind::tc_high_utility,
                              TestKind::tc_high_privacy,
                              TestKind::tc_high_utility_plus,
                              TestKind::tc_high_privacy_plus};
    std::uint64_t seed = 810;
    for (const TestKind kind : kinds) {
      PowerConfig cfg;
      cfg.test = kind;
      cfg.n = 100;
      cfg.effect = 0.0;
      cfg.trials = 2000;
      cfg.seed = seed++;
      const PowerEstimate est = estimate_power(cfg, refs);
      require(est.power <= 0.05 + 2.0 * est.std_error,
              "false positive rate of '" + to_string(kind) + "': " + num(est.power) +
                  " exceeds 0.05 + 2se = " + num(0.05 + 2.0 * est.std_error));
    }
  });

  criterion("injected noise has the calibrated variance", [] {
    const PairedDataset data = oracles::worked_example();
    const double w = pratt_statistic(data);
    const PrivacyParams params{1.0};
    RandomStream rng(909);
    const std::int64_t reps = 1'000'000;
    std::vector<double> noise(static_cast<std::size_t>(reps));
    for (auto& x : noise) {
      x = private_pratt_statistic(data, params, rng).w_tilde - w;
    }
    double mean = 0.0;
    for (const double x : noise) mean += x;
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (const double x : noise) var += (x - mean) * (x - mean);
    var /= static_cast<double>(reps - 1);
    require_rel(var, 200.0, 0.02, "noise variance at n=5, epsilon=1");
  });

  criterion("identical reruns of every command emit identical bytes", [&cli] {
    const fs::path dir = fs::current_path() / "acceptance_scratch";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path errlog = dir / "stderr.log";
    const fs::path csv = dir / "pairs.csv";
    {
      std::ofstream out(csv, std::ios::binary);
      out << "u,v\n9,18\n2,11\n3,3\n8,10\n9,8\n";
    }
    const std::string input = "--input \"" + csv.string() + "\"";
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"test", "test " + input + " --epsilon 1 --alpha 0.05 --c 20000 --seed 7"},
        {"test-plus", "test " + input + " --test tc-hp-plus --epsilon 1 --c 20000 --seed 8"},
        {"debug-statistic", "debug-statistic " + input},
        {"power",
         "power --test new,public --n 12 --epsilon 1 --effect 1 --trials 40 --c 20000 "
         "--seed 3 --format csv"},
        {"uniformity", "uniformity --n 20 --epsilon 1 --trials 100 --c 20000 --seed 5"},
        {"tables", "tables --epsilon 1 --n 10,20 --alpha 0.05,0.01 --c 20000 --seed 9"},
        {"compare", "compare --n 30 --epsilon 1,0.5 --alpha 0.05 --c 20000 --seed 11"},
    };
    for (const auto& [label, args] : commands) {
      const std::string first = run_cli(cli, args, dir / (label + ".1"), errlog);
      const std::string second = run_cli(cli, args, dir / (label + ".2"), errlog);
      require(!first.empty(), "'" + label + "' produced no output");
      require(first == second, "'" + label + "' reruns differ");
    }
  });

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criteria failed\n", g_failures);
  }
  return g_failures;
}
