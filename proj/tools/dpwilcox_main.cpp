#include <bit>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dpwilcox/cache.hpp"
#include "dpwilcox/csv.hpp"
#include "dpwilcox/distributions.hpp"
#include "dpwilcox/envelope.hpp"
#include "dpwilcox/errors.hpp"
#include "dpwilcox/experiments.hpp"
#include "dpwilcox/privacy.hpp"
#include "dpwilcox/ranks.hpp"
#include "dpwilcox/reference.hpp"
#include "dpwilcox/rng.hpp"
#include "dpwilcox/tc.hpp"

namespace {

using namespace dpwilcox;

struct CommonOptions {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string format = "json";
  std::optional<std::string> out;
};

void add_common_options(CLI::App* cmd, CommonOptions& o) {
  o.seed = entropy_seed();
  cmd->add_option("--seed", o.seed,
                  "master RNG seed (default: drawn from system entropy, recorded in the output)");
  cmd->add_option("--threads", o.threads, "worker threads, 0 = hardware concurrency")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "write the output to this file instead of stdout");
}

struct CsvFlags {
  std::string u_column = "u";
  std::string v_column = "v";
  std::string delimiter = ",";
};

void add_csv_flags(CLI::App* cmd, CsvFlags& o) {
  cmd->add_option("--u-col", o.u_column, "header name of the first value column")
      ->capture_default_str();
  cmd->add_option("--v-col", o.v_column, "header name of the second value column")
      ->capture_default_str();
  cmd->add_option("--delimiter", o.delimiter, "CSV field delimiter")->capture_default_str();
}

CsvOptions csv_options(const CsvFlags& o) {
  if (o.delimiter.size() != 1) {
    throw ParameterError("--delimiter must be a single character");
  }
  return CsvOptions{o.u_column, o.v_column, o.delimiter[0]};
}

void emit(const std::string& text, const std::optional<std::string>& out) {
  if (!out) {
    std::cout << text;
    return;
  }
  std::ofstream file(*out, std::ios::binary);
  if (!file) {
    throw InputError("cannot open output file: " + *out);
  }
  file << text;
  if (!file) {
    throw InputError("failed while writing output file: " + *out);
  }
}

void emit_json(const Json& envelope, const std::optional<std::string>& out) {
  emit(envelope.dump(2) + "\n", out);
}

Sidedness parse_sidedness(const std::string& name) {
  const auto sided = sidedness_from_string(name);
  if (!sided) {
    throw ParameterError("unknown sidedness: " + name);
  }
  return *sided;
}

TestKind parse_test_kind(const std::string& name) {
  const auto kind = test_kind_from_string(name);
  if (!kind) {
    throw ParameterError("unknown test: " + name);
  }
  return *kind;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("alpha must lie strictly between 0 and 1");
  }
}

Json json_or_null(const std::optional<std::string>& value) {
  return value ? Json(*value) : Json(nullptr);
}

// ---------------------------------------------------------------------------
// test: one private release on a paired CSV.

struct TestOptions {
  std::string input;
  double epsilon = 1.0;
  double alpha = 0.05;
  std::int64_t c = 1'000'000;
  std::string test = "new";
  std::string sidedness = "two";
  int k = 15;
  double gamma = 0.01;
  std::optional<std::string> cache_dir;
  CsvFlags csv;
  CommonOptions common;
};

void run_test(const TestOptions& o) {
  if (o.common.format != "json") {
    throw ParameterError("the test command emits a JSON envelope; csv is not defined for it");
  }
  const TestKind kind = parse_test_kind(o.test);
  if (kind == TestKind::public_test) {
    throw ParameterError(
        "the test command only releases private results; "
        "run debug-statistic for the non-private analysis");
  }
  const Sidedness sided = parse_sidedness(o.sidedness);
  validate(PrivacyParams{o.epsilon});
  check_alpha(o.alpha);

  const PairedDataset dataset = read_paired_csv(o.input, csv_options(o.csv));

  Json params;
  params["input"] = o.input;
  params["test"] = o.test;
  params["epsilon"] = o.epsilon;
  params["alpha"] = o.alpha;
  params["c"] = o.c;
  params["sidedness"] = to_string(sided);
  params["k"] = o.k;
  params["gamma"] = o.gamma;
  params["seed"] = o.common.seed;
  params["threads"] = o.common.threads;
  params["cache_dir"] = json_or_null(o.cache_dir);
  params["u_column"] = o.csv.u_column;
  params["v_column"] = o.csv.v_column;
  params["delimiter"] = o.csv.delimiter;

  Json payload;
  if (kind == TestKind::new_test) {
    PrivateTestResult result;
    if (o.cache_dir) {
      const ReferenceDistribution ref =
          load_or_simulate(dataset.n(), o.epsilon, o.c, reference_seed_for(o.common.seed),
                           o.cache_dir, o.common.threads);
      result =
          complete_test(dataset, o.epsilon, o.c, o.common.seed, sided, &ref, o.common.threads);
    } else {
      result =
          complete_test(dataset, o.epsilon, o.c, o.common.seed, sided, nullptr, o.common.threads);
    }
    payload = to_json(result);
  } else {
    TcConfig config;
    config.variant = (kind == TestKind::tc_high_privacy || kind == TestKind::tc_high_privacy_plus)
                         ? TcVariant::high_privacy
                         : TcVariant::high_utility;
    config.k = o.k;
    config.gamma = o.gamma;
    config.use_simulated_cv =
        kind == TestKind::tc_high_utility_plus || kind == TestKind::tc_high_privacy_plus;
    config.alpha = o.alpha;
    config.sidedness = sided;
    validate(config);

    RandomStream rng(derive_seed(o.common.seed, stream_tag::kStatisticNoise));
    TcResult result;
    if (config.use_simulated_cv) {
      const Eigen::Index m = tc_assumed_n_r(config.variant, dataset.n(), config.k);
      const ReferenceDistribution ref = load_or_simulate(
          m, o.epsilon, o.c,
          derive_seed(o.common.seed, stream_tag::kReferencePool, static_cast<std::uint64_t>(m),
                      std::bit_cast<std::uint64_t>(o.epsilon)),
          o.cache_dir, o.common.threads);
      const ReferenceBuilder builder = [&ref](Eigen::Index n,
                                              double epsilon) -> const ReferenceDistribution& {
        if (n != ref.n || epsilon != ref.epsilon) {
          throw ParameterError("reference request does not match the prepared distribution");
        }
        return ref;
      };
      result = tc_plus_test(dataset, o.epsilon, config, builder, rng);
    } else if (config.variant == TcVariant::high_privacy) {
      result = tc_high_privacy_test(dataset, o.epsilon, config, rng);
    } else {
      result = tc_high_utility_test(dataset, o.epsilon, config, rng);
    }
    payload = to_json(result);
  }
  emit_json(make_envelope("test", std::move(params), std::move(payload)), o.common.out);
}

// ---------------------------------------------------------------------------
// debug-statistic: the noiseless statistics, for development only.

struct DebugOptions {
  std::string input;
  CsvFlags csv;
  std::optional<std::string> out;
};

void run_debug_statistic(const DebugOptions& o) {
  const PairedDataset dataset = read_paired_csv(o.input, csv_options(o.csv));
  const WilcoxonResult drop = wilcoxon_statistic(dataset);

  Json params;
  params["input"] = o.input;
  params["u_column"] = o.csv.u_column;
  params["v_column"] = o.csv.v_column;
  params["delimiter"] = o.csv.delimiter;

  Json payload;
  payload["n"] = static_cast<std::int64_t>(dataset.n());
  payload["n_r"] = static_cast<std::int64_t>(drop.n_r);
  payload["w_drop_zeros"] = drop.w;
  payload["w_keep_zeros"] = pratt_statistic(dataset);
  emit_json(make_envelope("debug-statistic", std::move(params), std::move(payload)), o.out);
}

// ---------------------------------------------------------------------------
// power: rejection rates over a synthetic grid.

struct PowerOptions {
  std::vector<std::string> tests{"new"};
  std::vector<std::int64_t> ns{100};
  std::vector<double> epsilons{1.0};
  std::vector<double> effects{1.0};
  std::vector<double> tie_fractions{0.0};
  double alpha = 0.05;
  std::int64_t trials = 2000;
  std::int64_t c = 1'000'000;
  std::string sidedness = "two";
  int k = 15;
  double gamma = 0.01;
  CommonOptions common;
};

void run_power(const PowerOptions& o) {
  const Sidedness sided = parse_sidedness(o.sidedness);
  std::vector<PowerConfig> grid;
  std::uint64_t cell = 0;
  for (const std::string& name : o.tests) {
    for (const double epsilon : o.epsilons) {
      for (const std::int64_t n : o.ns) {
        for (const double effect : o.effects) {
          for (const double tie_fraction : o.tie_fractions) {
            PowerConfig cfg;
            cfg.n = n;
            cfg.epsilon = epsilon;
            cfg.effect = effect;
            cfg.tie_fraction = tie_fraction;
            cfg.alpha = o.alpha;
            cfg.trials = o.trials;
            cfg.c = o.c;
            cfg.test = parse_test_kind(name);
            cfg.seed = derive_seed(o.common.seed, stream_tag::kSweepCell, cell++);
            cfg.sidedness = sided;
            cfg.k = o.k;
            cfg.gamma = o.gamma;
            cfg.threads = o.common.threads;
            grid.push_back(cfg);
          }
        }
      }
    }
  }
  for (const PowerConfig& cfg : grid) {
    validate(cfg);
  }

  ReferenceCache refs(o.common.seed, o.c, o.common.threads);
  const std::vector<PowerEstimate> estimates = power_sweep(grid, refs);

  if (o.common.format == "csv") {
    emit(power_csv(estimates), o.common.out);
    return;
  }
  Json params;
  params["test"] = o.tests;
  params["n"] = o.ns;
  params["epsilon"] = o.epsilons;
  params["effect"] = o.effects;
  params["tie_fraction"] = o.tie_fractions;
  params["alpha"] = o.alpha;
  params["trials"] = o.trials;
  params["c"] = o.c;
  params["sidedness"] = to_string(sided);
  params["k"] = o.k;
  params["gamma"] = o.gamma;
  params["seed"] = o.common.seed;
  params["threads"] = o.common.threads;
  Json payload = Json::array();
  for (const PowerEstimate& estimate : estimates) {
    payload.push_back(to_json(estimate));
  }
  emit_json(make_envelope("power", std::move(params), std::move(payload)), o.common.out);
}

// ---------------------------------------------------------------------------
// uniformity: sorted null p-values against uniform quantiles.

struct UniformityOptions {
  std::int64_t n = 500;
  double epsilon = 1.0;
  double tie_fraction = 0.0;
  std::int64_t trials = 10'000;
  std::int64_t c = 1'000'000;
  double alpha = 0.05;
  bool full = false;
  CommonOptions common;
};

void run_uniformity(const UniformityOptions& o) {
  const UniformityReport report = pvalue_uniformity(o.n, o.epsilon, o.tie_fraction, o.trials, o.c,
                                                    o.common.seed, o.alpha, o.common.threads);
  if (o.common.format == "csv") {
    emit(uniformity_csv(report), o.common.out);
    return;
  }
  Json params;
  params["n"] = o.n;
  params["epsilon"] = o.epsilon;
  params["tie_fraction"] = o.tie_fraction;
  params["trials"] = o.trials;
  params["c"] = o.c;
  params["alpha"] = o.alpha;
  params["full"] = o.full;
  params["seed"] = o.common.seed;
  params["threads"] = o.common.threads;
  emit_json(make_envelope("uniformity", std::move(params), to_json(report, o.full)),
            o.common.out);
}

// ---------------------------------------------------------------------------
// tables: simulated critical values over an (epsilon, n, alpha) grid.

struct TablesOptions {
  std::vector<double> epsilons{1.0};
  std::vector<std::int64_t> ns{10, 20, 50, 100, 200, 500, 1000};
  std::vector<double> alphas{0.05, 0.025, 0.01, 0.005};
  std::int64_t c = 10'000'000;
  std::string sidedness = "one";
  bool normalized = true;
  std::optional<std::string> cache_dir;
  CommonOptions common;
};

void run_tables(const TablesOptions& o) {
  const Sidedness sided = parse_sidedness(o.sidedness);
  for (const double epsilon : o.epsilons) {
    validate(PrivacyParams{epsilon});
  }
  for (const std::int64_t n : o.ns) {
    if (n < 1) {
      throw ParameterError("n must be at least 1");
    }
  }
  for (const double alpha : o.alphas) {
    check_alpha(alpha);
  }
  const std::vector<Eigen::Index> ns(o.ns.begin(), o.ns.end());
  const std::vector<CriticalValueRow> rows =
      critical_value_table(o.epsilons, ns, o.alphas, o.c, sided, o.normalized, o.common.seed,
                           o.common.threads, o.cache_dir);
  if (o.common.format == "csv") {
    emit(tables_csv(rows), o.common.out);
    return;
  }
  Json params;
  params["epsilon"] = o.epsilons;
  params["n"] = o.ns;
  params["alpha"] = o.alphas;
  params["c"] = o.c;
  params["sidedness"] = to_string(sided);
  params["normalized"] = o.normalized;
  params["seed"] = o.common.seed;
  params["threads"] = o.common.threads;
  params["cache_dir"] = json_or_null(o.cache_dir);
  emit_json(make_envelope("tables", std::move(params), to_json(rows)), o.common.out);
}

// ---------------------------------------------------------------------------
// compare: public, simulated, and analytic-bound critical values side by side.

struct CompareOptions {
  std::int64_t n = 100;
  std::vector<double> epsilons{1.0, 0.1, 0.01};
  std::vector<double> alphas{0.05};
  double gamma = 0.01;
  std::int64_t c = 10'000'000;
  std::string sidedness = "one";
  std::optional<std::string> cache_dir;
  CommonOptions common;
};

void run_compare(const CompareOptions& o) {
  const Sidedness sided = parse_sidedness(o.sidedness);
  if (o.n < 1) {
    throw ParameterError("n must be at least 1");
  }
  for (const double epsilon : o.epsilons) {
    validate(PrivacyParams{epsilon});
  }
  for (const double alpha : o.alphas) {
    check_alpha(alpha);
    if (!(o.gamma > 0.0 && o.gamma < alpha)) {
      throw ParameterError("gamma must lie strictly between 0 and every alpha");
    }
  }

  Json payload = Json::array();
  std::string csv = "epsilon,alpha,public,new,tc\n";
  for (const double epsilon : o.epsilons) {
    const ReferenceDistribution ref = load_or_simulate(
        o.n, epsilon, o.c, table_cell_seed(o.common.seed, o.n, epsilon), o.cache_dir,
        o.common.threads);
    for (const double alpha : o.alphas) {
      const double tail = sided == Sidedness::two_sided ? 1.0 - alpha / 2.0 : 1.0 - alpha;
      const double public_cv = normal_quantile(tail);
      const double new_cv = critical_value(ref, alpha, sided, true).value;
      const double tc_cv = tc_analytic_critical_value(o.n, o.n, epsilon, alpha, o.gamma, true);
      Json row;
      row["epsilon"] = epsilon;
      row["alpha"] = alpha;
      row["public"] = public_cv;
      row["new"] = new_cv;
      row["tc"] = tc_cv;
      payload.push_back(std::move(row));
      csv += format_double(epsilon);
      csv += ',' + format_double(alpha);
      csv += ',' + format_double(public_cv);
      csv += ',' + format_double(new_cv);
      csv += ',' + format_double(tc_cv);
      csv += '\n';
    }
  }
  if (o.common.format == "csv") {
    emit(csv, o.common.out);
    return;
  }
  Json params;
  params["n"] = o.n;
  params["epsilon"] = o.epsilons;
  params["alpha"] = o.alphas;
  params["gamma"] = o.gamma;
  params["c"] = o.c;
  params["sidedness"] = to_string(sided);
  params["seed"] = o.common.seed;
  params["threads"] = o.common.threads;
  params["cache_dir"] = json_or_null(o.cache_dir);
  emit_json(make_envelope("compare", std::move(params), std::move(payload)), o.common.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private Wilcoxon signed-rank testing"};
  app.require_subcommand(1);

  TestOptions test_opts;
  CLI::App* test_cmd =
      app.add_subcommand("test", "Run one private signed-rank test on a paired CSV");
  test_cmd->add_option("--input", test_opts.input, "paired CSV file")->required();
  test_cmd->add_option("--epsilon", test_opts.epsilon, "privacy budget")->capture_default_str();
  test_cmd->add_option("--alpha", test_opts.alpha, "significance level (baseline tests)")
      ->capture_default_str();
  test_cmd->add_option("--c", test_opts.c, "reference draw count")->capture_default_str();
  test_cmd
      ->add_option("--test", test_opts.test, "which private test to run")
      ->check(CLI::IsMember({"new", "tc-hu", "tc-hp", "tc-hu-plus", "tc-hp-plus"}))
      ->capture_default_str();
  test_cmd->add_option("--sidedness", test_opts.sidedness, "rejection region")
      ->check(CLI::IsMember({"one", "two"}))
      ->capture_default_str();
  test_cmd->add_option("--k", test_opts.k, "dummy pairs per side (tc-hp variants)")
      ->capture_default_str();
  test_cmd->add_option("--gamma", test_opts.gamma, "Laplace tail budget of the analytic bound")
      ->capture_default_str();
  test_cmd->add_option("--cache-dir", test_opts.cache_dir,
                       "directory for cached reference distributions");
  add_csv_flags(test_cmd, test_opts.csv);
  add_common_options(test_cmd, test_opts.common);
  test_cmd->callback([&test_opts] { run_test(test_opts); });

  DebugOptions debug_opts;
  CLI::App* debug_cmd = app.add_subcommand(
      "debug-statistic", "Print the NOISELESS statistics of a paired CSV (not private)");
  debug_cmd->add_option("--input", debug_opts.input, "paired CSV file")->required();
  add_csv_flags(debug_cmd, debug_opts.csv);
  debug_cmd->add_option("--out", debug_opts.out, "write the output to this file");
  debug_cmd->callback([&debug_opts] { run_debug_statistic(debug_opts); });

  PowerOptions power_opts;
  CLI::App* power_cmd =
      app.add_subcommand("power", "Estimate rejection rates over a synthetic grid");
  power_cmd->add_option("--test", power_opts.tests, "tests to run (repeat or comma-separate)")
      ->delimiter(',')
      ->check(CLI::IsMember({"new", "tc-hu", "tc-hp", "tc-hu-plus", "tc-hp-plus", "public"}))
      ->capture_default_str();
  power_cmd->add_option("--n", power_opts.ns, "row counts")->delimiter(',')->capture_default_str();
  power_cmd->add_option("--epsilon", power_opts.epsilons, "privacy budgets")
      ->delimiter(',')
      ->capture_default_str();
  power_cmd->add_option("--effect", power_opts.effects, "mean shift of the second column")
      ->delimiter(',')
      ->capture_default_str();
  power_cmd
      ->add_option("--tie-fraction", power_opts.tie_fractions, "fraction of exactly tied rows")
      ->delimiter(',')
      ->capture_default_str();
  power_cmd->add_option("--alpha", power_opts.alpha, "significance level")->capture_default_str();
  power_cmd->add_option("--trials", power_opts.trials, "Monte-Carlo trials per cell")
      ->capture_default_str();
  power_cmd->add_option("--c", power_opts.c, "reference draw count")->capture_default_str();
  power_cmd->add_option("--sidedness", power_opts.sidedness, "rejection region")
      ->check(CLI::IsMember({"one", "two"}))
      ->capture_default_str();
  power_cmd->add_option("--k", power_opts.k, "dummy pairs per side (tc-hp variants)")
      ->capture_default_str();
  power_cmd->add_option("--gamma", power_opts.gamma, "Laplace tail budget of the analytic bound")
      ->capture_default_str();
  add_common_options(power_cmd, power_opts.common);
  power_cmd->callback([&power_opts] { run_power(power_opts); });

  UniformityOptions uniformity_opts;
  CLI::App* uniformity_cmd =
      app.add_subcommand("uniformity", "Sorted null p-values against uniform quantiles");
  uniformity_cmd->add_option("--n", uniformity_opts.n, "row count")->capture_default_str();
  uniformity_cmd->add_option("--epsilon", uniformity_opts.epsilon, "privacy budget")
      ->capture_default_str();
  uniformity_cmd
      ->add_option("--tie-fraction", uniformity_opts.tie_fraction, "fraction of exactly tied rows")
      ->capture_default_str();
  uniformity_cmd->add_option("--trials", uniformity_opts.trials, "null datasets to test")
      ->capture_default_str();
  uniformity_cmd->add_option("--c", uniformity_opts.c, "reference draw count")
      ->capture_default_str();
  uniformity_cmd->add_option("--alpha", uniformity_opts.alpha, "rejection-rate threshold")
      ->capture_default_str();
  uniformity_cmd->add_flag("--full", uniformity_opts.full,
                           "include the sorted p-value arrays in the JSON payload");
  add_common_options(uniformity_cmd, uniformity_opts.common);
  uniformity_cmd->callback([&uniformity_opts] { run_uniformity(uniformity_opts); });

  TablesOptions tables_opts;
  CLI::App* tables_cmd =
      app.add_subcommand("tables", "Simulated critical values over an (epsilon, n, alpha) grid");
  tables_cmd->add_option("--epsilon", tables_opts.epsilons, "privacy budgets")
      ->delimiter(',')
      ->capture_default_str();
  tables_cmd->add_option("--n", tables_opts.ns, "row counts")
      ->delimiter(',')
      ->capture_default_str();
  tables_cmd->add_option("--alpha", tables_opts.alphas, "significance levels")
      ->delimiter(',')
      ->capture_default_str();
  tables_cmd->add_option("--c", tables_opts.c, "reference draw count")->capture_default_str();
  tables_cmd->add_option("--sidedness", tables_opts.sidedness, "quantile of signed draws (one) or of |draws| (two)")
      ->check(CLI::IsMember({"one", "two"}))
      ->capture_default_str();
  tables_cmd->add_flag("--normalized,!--unnormalized", tables_opts.normalized,
                       "divide critical values by the null standard deviation");
  tables_cmd->add_option("--cache-dir", tables_opts.cache_dir,
                         "directory for cached reference distributions");
  add_common_options(tables_cmd, tables_opts.common);
  tables_cmd->callback([&tables_opts] { run_tables(tables_opts); });

  CompareOptions compare_opts;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "Public, simulated, and analytic-bound critical values side by side");
  compare_cmd->add_option("--n", compare_opts.n, "row count")->capture_default_str();
  compare_cmd->add_option("--epsilon", compare_opts.epsilons, "privacy budgets")
      ->delimiter(',')
      ->capture_default_str();
  compare_cmd->add_option("--alpha", compare_opts.alphas, "significance levels")
      ->delimiter(',')
      ->capture_default_str();
  compare_cmd->add_option("--gamma", compare_opts.gamma,
                          "Laplace tail budget of the analytic bound")
      ->capture_default_str();
  compare_cmd->add_option("--c", compare_opts.c, "reference draw count")->capture_default_str();
  compare_cmd->add_option("--sidedness", compare_opts.sidedness, "rejection region")
      ->check(CLI::IsMember({"one", "two"}))
      ->capture_default_str();
  compare_cmd->add_option("--cache-dir", compare_opts.cache_dir,
                          "directory for cached reference distributions");
  add_common_options(compare_cmd, compare_opts.common);
  compare_cmd->callback([&compare_opts] { run_compare(compare_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
