#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "disorder/evaluate.hpp"
#include "disorder/model.hpp"
#include "disorder/oracle.hpp"
#include "disorder/simulate.hpp"
#include "disorder/solver.hpp"
#include "disorder/verify.hpp"

namespace disorder {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  out << content;
  if (!out) throw io_error("write failed: " + path);
}

/// FNV-1a over bytes, rendered as 16 hex digits.
inline std::string hex_digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Model JSON

inline json model_to_json(const ModelSpec& spec) {
  return json{{"alphabet_size", spec.alphabet_size},
              {"regime_count", spec.regime_count},
              {"kernel_pre", spec.kernel_pre},
              {"kernel_mid", spec.kernel_mid},
              {"kernel_post", spec.kernel_post},
              {"pi", spec.pi},
              {"rho", spec.rho},
              {"p1", spec.p1},
              {"q1", spec.q1},
              {"p2", spec.p2},
              {"q2", spec.q2},
              {"regime_prior", spec.regime_prior},
              {"initial_state", spec.initial_state}};
}

inline ModelSpec model_from_json(const json& j) {
  ModelSpec spec;
  try {
    spec.alphabet_size = j.at("alphabet_size").get<int>();
    spec.regime_count = j.at("regime_count").get<int>();
    spec.kernel_pre = j.at("kernel_pre").get<Kernel>();
    spec.kernel_mid = j.at("kernel_mid").get<std::vector<Kernel>>();
    spec.kernel_post = j.at("kernel_post").get<Kernel>();
    spec.pi = j.at("pi").get<double>();
    spec.rho = j.at("rho").get<double>();
    spec.p1 = j.at("p1").get<double>();
    spec.q1 = j.contains("q1") ? j.at("q1").get<double>() : 1.0 - spec.p1;
    spec.p2 = j.at("p2").get<double>();
    spec.q2 = j.contains("q2") ? j.at("q2").get<double>() : 1.0 - spec.p2;
    spec.regime_prior = j.at("regime_prior").get<std::vector<double>>();
    spec.initial_state = j.at("initial_state").get<int>();
  } catch (const json::exception& e) {
    throw io_error(std::string("model json: ") + e.what());
  }
  return spec;
}

/// Parses and validates a model file.  Parse and shape problems raise
/// io_error; violated model assumptions raise model_error.
inline ModelSpec read_model_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw io_error(path + ": " + e.what());
  }
  return validate_model(model_from_json(j));
}

inline std::string model_digest(const ModelSpec& spec) {
  return hex_digest(model_to_json(spec).dump());
}

// ---------------------------------------------------------------------------
// Policy JSON

inline json policy_to_json(const StoppingPolicy& p) {
  json grid{{"resolution", p.grid_resolution},
            {"direction_dims", p.direction_dims()},
            {"node_count", p.node_count()},
            {"interpolation", "multilinear"},
            {"first_stop_direction", "frozen at regime_prior"},
            {"first_stop_scaling", "tables per unit of previous-step no-change mass"}};
  json log2 = json::array(), log1 = json::array();
  for (const auto& d : p.second_stop_log) log2.push_back({{"sweep", d.sweep}, {"delta", d.delta}});
  for (const auto& d : p.first_stop_log) log1.push_back({{"sweep", d.sweep}, {"delta", d.delta}});
  return json{{"format_version", 1},
              {"alphabet_size", p.alphabet_size},
              {"regime_count", p.regime_count},
              {"tol", p.tol},
              {"grid", grid},
              {"regime_prior", p.regime_prior},
              {"r_star", p.r_star},
              {"R_tilde", p.R_tilde},
              {"R_star", p.R_star},
              {"R_rho_star", p.R_rho_star},
              {"first_stop_payoff", p.first_stop_payoff},
              {"first_stop_value", p.first_stop_value},
              {"first_stop_continuation", p.first_stop_continuation},
              {"iteration_log", {{"second_stop", log2}, {"first_stop", log1}}}};
}

inline StoppingPolicy policy_from_json(const json& j) {
  StoppingPolicy p;
  try {
    if (j.at("format_version").get<int>() != 1)
      throw io_error("policy json: unsupported format_version");
    p.alphabet_size = j.at("alphabet_size").get<int>();
    p.regime_count = j.at("regime_count").get<int>();
    p.tol = j.at("tol").get<double>();
    p.grid_resolution = j.at("grid").at("resolution").get<int>();
    p.regime_prior = j.at("regime_prior").get<std::vector<double>>();
    p.r_star = j.at("r_star").get<std::vector<double>>();
    p.R_tilde = j.at("R_tilde").get<std::vector<double>>();
    p.R_star = j.at("R_star").get<std::vector<double>>();
    p.R_rho_star = j.at("R_rho_star").get<std::vector<double>>();
    p.first_stop_payoff = j.at("first_stop_payoff").get<std::vector<double>>();
    p.first_stop_value = j.at("first_stop_value").get<std::vector<double>>();
    p.first_stop_continuation = j.at("first_stop_continuation").get<std::vector<double>>();
    for (const auto& d : j.at("iteration_log").at("second_stop"))
      p.second_stop_log.push_back({d.at("sweep").get<int>(), d.at("delta").get<double>()});
    for (const auto& d : j.at("iteration_log").at("first_stop"))
      p.first_stop_log.push_back({d.at("sweep").get<int>(), d.at("delta").get<double>()});
  } catch (const json::exception& e) {
    throw io_error(std::string("policy json: ") + e.what());
  }
  return p;
}

inline StoppingPolicy read_policy_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw io_error(path + ": " + e.what());
  }
  return policy_from_json(j);
}

// ---------------------------------------------------------------------------
// Trajectory CSV: seed,theta1,theta2,regime,space-separated observations

inline void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajs) {
  os << "seed,theta1,theta2,regime,observations\n";
  for (const Trajectory& t : trajs) {
    os << t.seed << ',' << t.theta1 << ',' << t.theta2 << ',' << t.regime << ',';
    for (std::size_t i = 0; i < t.observations.size(); ++i)
      os << t.observations[i] << (i + 1 < t.observations.size() ? ' ' : '\n');
  }
}

inline std::vector<Trajectory> parse_trajectories_csv(std::istream& is) {
  std::vector<Trajectory> out;
  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& what) {
    throw io_error("trajectory csv line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "seed,theta1,theta2,regime,observations") fail("bad header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (int f = 0; f < 4; ++f) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) fail("expected 5 comma-separated fields");
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    fields.push_back(line.substr(start));
    Trajectory t;
    try {
      t.seed = std::stoull(fields[0]);
      t.theta1 = std::stoll(fields[1]);
      t.theta2 = std::stoll(fields[2]);
      t.regime = std::stoi(fields[3]);
      std::istringstream obs(fields[4]);
      int v;
      while (obs >> v) t.observations.push_back(v);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    if (t.observations.empty()) fail("no observations");
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline json report_to_json(const EvaluationReport& r) {
  json j{{"n_runs", r.n_runs},
         {"detection_prob_estimate", r.detection_prob_estimate},
         {"wilson_ci_95", {r.wilson.lo, r.wilson.hi}},
         {"mean_tau_error", r.tau_error_count > 0 ? json(r.mean_tau_error) : json()},
         {"mean_sigma_error", r.sigma_error_count > 0 ? json(r.mean_sigma_error) : json()},
         {"oracle_value", r.has_exact ? json(r.oracle_value) : json()},
         {"policy_value_exact", r.has_exact ? json(r.policy_value_exact) : json()},
         {"config_digest", r.config_digest},
         {"seeds", {{"begin", r.seed_begin}, {"end", r.seed_end}}},
         {"horizon", r.horizon}};
  return j;
}

/// Oracle regression snapshot: exact optimal value, per-prefix stopping
/// decisions and posterior tables at desk scale.
inline json oracle_report_to_json(const ModelSpec& spec, int horizon) {
  const OraclePolicyTable table = brute_force_policy(spec, horizon);
  json prefixes = json::array();
  for (const auto& [prefix, stop] : table.stop_first) {
    json second = json::object();
    for (int m = 0; m < static_cast<int>(prefix.size()); ++m) {
      const auto it = table.stop_second.find({m, prefix});
      if (it != table.stop_second.end()) second[std::to_string(m)] = it->second;
    }
    const ExactPosteriors ex = enumerate_posteriors(spec, prefix);
    json pairs = json::object();
    for (const auto& [m, pair] : ex.pair_beliefs) pairs[std::to_string(m)] = pair;
    prefixes.push_back({{"prefix", prefix},
                        {"stop_first", stop},
                        {"stop_second", second},
                        {"pi1", ex.belief.pi1},
                        {"pi2", ex.belief.pi2},
                        {"pi12", ex.belief.pi12},
                        {"upsilon", ex.belief.upsilon},
                        {"pair_beliefs", pairs}});
  }
  return json{{"horizon", horizon},
              {"optimal_value", table.optimal_value},
              {"prefixes", prefixes}};
}

inline json verify_report_to_json(const VerifyReport& r, const std::string& digest) {
  json checks = json::array();
  for (const CheckResult& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"cases", c.cases},
                      {"max_error", c.max_error},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass()}});
  return json{{"model_digest", digest},
              {"depth", r.depth},
              {"checks", checks},
              {"all_pass", r.all_pass()}};
}

}  // namespace disorder
