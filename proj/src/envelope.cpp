#include "dpwilcox/envelope.hpp"

#include <charconv>

#include "dpwilcox/version.hpp"

namespace dpwilcox {

std::string to_string(Sidedness sidedness) {
  return sidedness == Sidedness::two_sided ? "two" : "one";
}

std::optional<Sidedness> sidedness_from_string(const std::string& name) {
  if (name == "two" || name == "two-sided" || name == "two_sided") return Sidedness::two_sided;
  if (name == "one" || name == "one-sided" || name == "one_sided") return Sidedness::one_sided;
  return std::nullopt;
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

Json make_envelope(const std::string& command, Json parameters, Json payload) {
  Json envelope;
  envelope["command"] = command;
  envelope["version"] = kVersion;
  envelope["parameters"] = std::move(parameters);
  envelope["payload"] = std::move(payload);
  return envelope;
}

Json to_json(const PrivateTestResult& result) {
  Json j;
  j["w_tilde"] = result.w_tilde;
  j["p"] = result.p;
  j["n"] = static_cast<std::int64_t>(result.n);
  j["epsilon"] = result.epsilon;
  j["c"] = result.c;
  j["seed"] = result.seed;
  return j;
}

Json to_json(const TcResult& result) {
  Json j;
  j["w_tilde"] = result.w_tilde;
  j["critical_value"] = result.critical_value;
  j["reject"] = result.reject;
  j["assumed_n_r"] = static_cast<std::int64_t>(result.assumed_n_r);
  j["differentially_private"] = result.differentially_private;
  return j;
}

Json to_json(const PowerEstimate& estimate) {
  const PowerConfig& cfg = estimate.config;
  Json j;
  j["test"] = to_string(cfg.test);
  j["n"] = static_cast<std::int64_t>(cfg.n);
  j["epsilon"] = cfg.epsilon;
  j["effect"] = cfg.effect;
  j["tie_fraction"] = cfg.tie_fraction;
  j["alpha"] = cfg.alpha;
  j["trials"] = cfg.trials;
  j["power"] = estimate.power;
  j["stderr"] = estimate.std_error;
  return j;
}

Json to_json(const std::vector<CriticalValueRow>& rows) {
  Json arr = Json::array();
  for (const auto& row : rows) {
    Json j;
    j["epsilon"] = row.epsilon;
    j["n"] = static_cast<std::int64_t>(row.n);
    j["alpha"] = row.alpha;
    j["critical_value"] = row.critical_value;
    arr.push_back(std::move(j));
  }
  return arr;
}

Json to_json(const UniformityReport& report, bool include_arrays) {
  Json j;
  j["trials"] = static_cast<std::int64_t>(report.sorted_p.size());
  j["alpha"] = report.alpha;
  j["max_abs_deviation"] = report.max_abs_deviation;
  j["max_signed_deviation"] = report.max_signed_deviation;
  j["min_signed_deviation"] = report.min_signed_deviation;
  j["rejection_rate"] = report.rejection_rate;
  if (include_arrays) {
    Json p = Json::array();
    Json q = Json::array();
    for (Eigen::Index i = 0; i < report.sorted_p.size(); ++i) {
      p.push_back(report.sorted_p[i]);
      q.push_back(report.uniform_quantiles[i]);
    }
    j["sorted_p"] = std::move(p);
    j["uniform_quantiles"] = std::move(q);
  }
  return j;
}

std::string power_csv(const std::vector<PowerEstimate>& estimates) {
  std::string out = "test,n,epsilon,effect,tie_fraction,alpha,trials,power,stderr\n";
  for (const auto& e : estimates) {
    const PowerConfig& cfg = e.config;
    out += to_string(cfg.test);
    out += ',' + std::to_string(static_cast<std::int64_t>(cfg.n));
    out += ',' + format_double(cfg.epsilon);
    out += ',' + format_double(cfg.effect);
    out += ',' + format_double(cfg.tie_fraction);
    out += ',' + format_double(cfg.alpha);
    out += ',' + std::to_string(cfg.trials);
    out += ',' + format_double(e.power);
    out += ',' + format_double(e.std_error);
    out += '\n';
  }
  return out;
}

std::string tables_csv(const std::vector<CriticalValueRow>& rows) {
  std::string out = "epsilon,n,alpha,critical_value\n";
  for (const auto& row : rows) {
    out += format_double(row.epsilon);
    out += ',' + std::to_string(static_cast<std::int64_t>(row.n));
    out += ',' + format_double(row.alpha);
    out += ',' + format_double(row.critical_value);
    out += '\n';
  }
  return out;
}

std::string uniformity_csv(const UniformityReport& report) {
  std::string out = "p,uniform_quantile\n";
  for (Eigen::Index i = 0; i < report.sorted_p.size(); ++i) {
    out += format_double(report.sorted_p[i]);
    out += ',' + format_double(report.uniform_quantiles[i]);
    out += '\n';
  }
  return out;
}

}  // namespace dpwilcox
