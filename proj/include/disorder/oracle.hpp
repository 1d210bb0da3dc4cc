#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "disorder/likelihood.hpp"
#include "disorder/model.hpp"

namespace disorder {

/// Raised when a brute-force computation would exceed its desk-scale guard.
class guard_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kEnumerationMaxDepth = 20;
inline constexpr int kPolicyMaxHorizon = 8;
inline constexpr double kPolicyMaxPaths = 1e6;

/// Exhaustive joint weights P(theta1=j, theta2=k, regime=u) x likelihood for
/// a fixed path, with the (j > n) and (k > n) blocks aggregated in closed
/// form (beyond the horizon the likelihood no longer depends on j, k).
struct EnumerationTable {
  std::vector<int> path;
  int horizon = 0;        // n
  int regime_count = 0;
  std::vector<double> finite;           // [(j*(n+1)+k)*K + u], j,k <= n, zero for k<j
  std::vector<double> theta2_tail;      // [j*K + u]: theta1=j<=n, theta2>n
  std::vector<double> coincident_tail;  // [u]: theta1=theta2>n
  std::vector<double> ordered_tail;     // [u]: n<theta1<theta2
  double normalizer = 0.0;              // S_n(path)

  double finite_at(int j, int k, int u) const {
    return finite[(static_cast<std::size_t>(j) * (horizon + 1) + k) * regime_count + u];
  }
};

/// Joint density P(theta1=j, theta2=k, path) summed over regimes.
inline double joint_path_density(const ModelSpec& spec, std::span<const int> path,
                                 std::int64_t j, std::int64_t k) {
  const double w = prior_theta1_pmf(spec, j) * prior_theta2_given_theta1_pmf(spec, j, k);
  if (w == 0.0) return 0.0;
  double l = 0.0;
  for (int u = 0; u < spec.regime_count; ++u)
    l += spec.regime_prior[u] * detail::path_likelihood(spec, path, j, k, u);
  return w * l;
}

inline EnumerationTable enumerate_table(const ModelSpec& spec, std::span<const int> path) {
  if (path.empty()) throw std::domain_error("enumerate_table: empty path");
  const int n = static_cast<int>(path.size()) - 1;
  if (n > kEnumerationMaxDepth)
    throw guard_error("enumerate_table: path length " + std::to_string(n) +
                      " exceeds guard " + std::to_string(kEnumerationMaxDepth));
  const int K = spec.regime_count;

  EnumerationTable t;
  t.path.assign(path.begin(), path.end());
  t.horizon = n;
  t.regime_count = K;
  t.finite.assign(static_cast<std::size_t>(n + 1) * (n + 1) * K, 0.0);
  t.theta2_tail.assign(static_cast<std::size_t>(n + 1) * K, 0.0);
  t.coincident_tail.assign(K, 0.0);
  t.ordered_tail.assign(K, 0.0);

  const double all_pre = detail::path_likelihood(spec, path, n + 1, n + 2, 0);
  double sum = 0.0;
  for (int u = 0; u < K; ++u) {
    const double ru = spec.regime_prior[u];
    t.coincident_tail[u] = ru * spec.rho * prior_theta1_tail(spec, n) * all_pre;
    t.ordered_tail[u] = ru * (1.0 - spec.rho) * prior_theta1_tail(spec, n) * all_pre;
    sum += t.coincident_tail[u] + t.ordered_tail[u];
    for (int j = 0; j <= n; ++j) {
      const double pj = prior_theta1_pmf(spec, j);
      for (int k = j; k <= n; ++k) {
        const double w = ru * pj * prior_theta2_given_theta1_pmf(spec, j, k) *
                         detail::path_likelihood(spec, path, j, k, u);
        t.finite[(static_cast<std::size_t>(j) * (n + 1) + k) * K + u] = w;
        sum += w;
      }
      const double tail = ru * pj * prior_theta2_tail(spec, j, n) *
                          detail::path_likelihood(spec, path, j, n + 1, u);
      t.theta2_tail[static_cast<std::size_t>(j) * K + u] = tail;
      sum += tail;
    }
  }
  t.normalizer = sum;
  return t;
}

/// Exact posteriors by Bayes over the enumeration table.
struct ExactPosteriors {
  BeliefVector belief;
  std::map<int, std::vector<double>> pair_beliefs;  // m -> per-regime
};

inline ExactPosteriors enumerate_posteriors(const ModelSpec& spec, std::span<const int> path) {
  const EnumerationTable t = enumerate_table(spec, path);
  const int n = t.horizon;
  const int K = t.regime_count;
  if (!(t.normalizer > 0.0))
    throw std::domain_error("enumerate_posteriors: path has zero density");

  ExactPosteriors out;
  out.belief.pi1.assign(K, 0.0);
  out.belief.pi2.assign(K, 0.0);
  out.belief.pi12.assign(K, 0.0);
  out.belief.upsilon.assign(K, 0.0);
  const double s = t.normalizer;
  for (int u = 0; u < K; ++u) {
    double first_by = 0.0, second_by = 0.0;
    for (int j = 0; j <= n; ++j) {
      for (int k = j; k <= n; ++k) second_by += t.finite_at(j, k, u);
      first_by += t.theta2_tail[static_cast<std::size_t>(j) * K + u];
    }
    first_by += second_by;
    out.belief.pi1[u] = first_by / s;
    out.belief.pi2[u] = second_by / s;
    out.belief.pi12[u] = t.coincident_tail[u] / s;
    out.belief.upsilon[u] =
        (first_by + t.coincident_tail[u] + t.ordered_tail[u]) / s;
  }
  for (int m = 0; m <= n; ++m) {
    std::vector<double> pair(K);
    for (int u = 0; u < K; ++u)
      pair[u] = t.theta2_tail[static_cast<std::size_t>(m) * K + u] / s;
    out.pair_beliefs.emplace(m, std::move(pair));
  }
  return out;
}

/// Decision table for a compound stopping pair, indexed by raw observation
/// prefixes (X_0 included).  stop_first is consulted while the first stop is
/// pending; stop_second[(m, prefix)] once the first stop fired at m.
struct OraclePolicyTable {
  int horizon = 0;
  std::map<std::vector<int>, bool> stop_first;
  std::map<std::pair<int, std::vector<int>>, bool> stop_second;
  double optimal_value = 0.0;  // filled by brute_force_policy
};

namespace detail {

// Inner DP: best unnormalized value of the second stop at time >= n given
// the first stop fired at m, over the prefix subtree.  Records decisions.
inline double oracle_inner_value(const ModelSpec& spec, int m, std::vector<int>& prefix,
                                 int horizon, OraclePolicyTable* table) {
  const int n = static_cast<int>(prefix.size()) - 1;
  const double stop_val = joint_path_density(spec, prefix, m, n);
  if (n == horizon) {
    if (table) table->stop_second[{m, prefix}] = true;
    return stop_val;
  }
  double cont = 0.0;
  for (int y = 0; y < spec.alphabet_size; ++y) {
    prefix.push_back(y);
    cont += oracle_inner_value(spec, m, prefix, horizon, table);
    prefix.pop_back();
  }
  if (table) table->stop_second[{m, prefix}] = stop_val >= cont;
  return std::max(stop_val, cont);
}

inline double oracle_outer_value(const ModelSpec& spec, std::vector<int>& prefix,
                                 int horizon, OraclePolicyTable* table) {
  const int n = static_cast<int>(prefix.size()) - 1;
  const double stop_val = oracle_inner_value(spec, n, prefix, horizon, table);
  if (n == horizon) {
    if (table) table->stop_first[prefix] = true;
    return stop_val;
  }
  double cont = 0.0;
  for (int y = 0; y < spec.alphabet_size; ++y) {
    prefix.push_back(y);
    cont += oracle_outer_value(spec, prefix, horizon, table);
    prefix.pop_back();
  }
  if (table) table->stop_first[prefix] = stop_val >= cont;
  return std::max(stop_val, cont);
}

}  // namespace detail

/// Exact optimal value of max P(tau = theta1, sigma = theta2) over adapted
/// pairs tau <= sigma <= horizon, by backward induction over raw observation
/// prefixes.  Deliberately shares no belief machinery with the filter or the
/// solver.  Guarded to desk scale.
inline OraclePolicyTable brute_force_policy(const ModelSpec& spec, int horizon) {
  if (horizon < 0 || horizon > kPolicyMaxHorizon)
    throw guard_error("brute_force_policy: horizon exceeds guard " +
                      std::to_string(kPolicyMaxHorizon));
  if (std::pow(spec.alphabet_size, horizon) > kPolicyMaxPaths)
    throw guard_error("brute_force_policy: path count exceeds guard");
  OraclePolicyTable table;
  table.horizon = horizon;
  std::vector<int> prefix{spec.initial_state};
  table.optimal_value = detail::oracle_outer_value(spec, prefix, horizon, &table);
  return table;
}

namespace detail {

template <typename Fn>
inline void for_each_full_path(const ModelSpec& spec, int horizon, Fn&& fn) {
  std::vector<int> path{spec.initial_state};
  // Odometer over the alphabet^horizon continuations.
  std::vector<int> digits(horizon, 0);
  while (true) {
    path.resize(1);
    path.insert(path.end(), digits.begin(), digits.end());
    fn(path);
    int d = horizon - 1;
    while (d >= 0 && ++digits[d] == spec.alphabet_size) digits[d--] = 0;
    if (d < 0) break;
    if (horizon == 0) break;
  }
}

}  // namespace detail

/// Exact P(tau = theta1, sigma = theta2) of the tabulated policy, by summing
/// joint path-configuration densities over every path of length `horizon`.
/// Throws if the table leaves a reachable prefix undecided.
inline double evaluate_policy_exact(const ModelSpec& spec, const OraclePolicyTable& table,
                                    int horizon) {
  if (std::pow(spec.alphabet_size, horizon) > kPolicyMaxPaths)
    throw guard_error("evaluate_policy_exact: path count exceeds guard");
  double value = 0.0;
  detail::for_each_full_path(spec, horizon, [&](const std::vector<int>& path) {
    int tau = -1;
    std::vector<int> prefix;
    for (int n = 0; n <= horizon && tau < 0; ++n) {
      prefix.push_back(path[n]);
      auto it = table.stop_first.find(prefix);
      if (it == table.stop_first.end())
        throw std::domain_error("evaluate_policy_exact: undecided prefix at n=" +
                                std::to_string(n));
      if (it->second) tau = n;
    }
    if (tau < 0) return;  // never stopped: scores zero
    int sigma = -1;
    for (int n = tau; n <= horizon && sigma < 0; ++n) {
      prefix.assign(path.begin(), path.begin() + n + 1);
      auto it = table.stop_second.find({tau, prefix});
      if (it == table.stop_second.end())
        throw std::domain_error("evaluate_policy_exact: undecided second-stop prefix");
      if (it->second) sigma = n;
    }
    if (sigma < 0) return;
    value += joint_path_density(spec, path, tau, sigma);
  });
  return value;
}

/// Value of the best data-ignoring policy: stop at fixed times (j, k).
inline double best_blind_value(const ModelSpec& spec, int horizon) {
  double best = 0.0;
  for (int j = 0; j <= horizon; ++j)
    for (int k = j; k <= horizon; ++k) {
      const double v = prior_theta1_pmf(spec, j) * prior_theta2_given_theta1_pmf(spec, j, k);
      if (v > best) best = v;
    }
  return best;
}

/// Decision table of the blind policy tau = j, sigma = k.
inline OraclePolicyTable make_blind_policy_table(const ModelSpec& spec, int horizon, int j,
                                                 int k) {
  OraclePolicyTable table;
  table.horizon = horizon;
  detail::for_each_full_path(spec, horizon, [&](const std::vector<int>& path) {
    std::vector<int> prefix;
    for (int n = 0; n <= horizon; ++n) {
      prefix.push_back(path[n]);
      table.stop_first[prefix] = (n >= j);
      for (int m = 0; m <= n; ++m) table.stop_second[{m, prefix}] = (n >= k);
    }
  });
  table.optimal_value = evaluate_policy_exact(spec, table, horizon);
  return table;
}

}  // namespace disorder
