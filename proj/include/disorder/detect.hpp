#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "disorder/filter.hpp"
#include "disorder/model.hpp"
#include "disorder/oracle.hpp"
#include "disorder/solver.hpp"

namespace disorder {

/// Sentinel for a stop that never fired within the horizon.
inline constexpr std::int64_t kNeverStopped = -1;

struct DecisionTraceRow {
  int n = 0;
  bool second_phase = false;
  double statistic1 = 0.0;  // first-stop payoff (scaled); valid while tau pending
  bool in_b_star = false;
  double statistic2 = 0.0;  // second-stop statistic; valid once tau fired
  double threshold2 = 0.0;
  std::string action;  // continue | stop_first | stop_second | stop_both | immediate_stop | zero_pair_mass
};

struct DetectionResult {
  std::int64_t tau = kNeverStopped;
  std::int64_t sigma = kNeverStopped;
  bool hit1 = false;  // tau == theta1, filled by score_detection
  bool hit2 = false;  // sigma == theta2
  std::vector<DecisionTraceRow> trace;
};

/// Applies a solved policy online.  The first stop fires at the first n >= 1
/// whose last transition lies in the stopping set (or at 0 when the
/// immediate-stop test holds, in which case both stops fire at 0); from then
/// on only the pair belief spawned at tau drives the second stop.  Truncates
/// with "never" at max_horizon or at the end of the observations.
inline DetectionResult run_detector(const ModelSpec& spec, const StoppingPolicy& policy,
                                    std::span<const int> observations,
                                    std::int64_t max_horizon, bool want_trace = false) {
  if (observations.empty() || observations[0] != spec.initial_state)
    throw std::domain_error("run_detector: observations must start at the initial state");

  DetectionResult res;
  if (immediate_stop_test(spec, policy)) {
    res.tau = res.sigma = 0;
    if (want_trace) res.trace.push_back({0, false, 0.0, true, 0.0, 0.0, "immediate_stop"});
    return res;
  }

  const std::int64_t last =
      std::min<std::int64_t>(static_cast<std::int64_t>(observations.size()) - 1, max_horizon);
  FilterState st = init_filter(spec);
  for (std::int64_t n = 1; n <= last; ++n) {
    st = step_filter(spec, st, observations[static_cast<std::size_t>(n)]);
    if (res.tau == kNeverStopped) {
      const FirstStopCheck c1 = first_stop_rule(spec, policy, st.prev_obs, st.cur_obs);
      if (c1.stop) {
        res.tau = n;
        const SecondStopCheck c2 = second_stop_rule(spec, policy, st, static_cast<int>(n));
        if (want_trace)
          res.trace.push_back({static_cast<int>(n), false, c1.payoff, true, c2.statistic,
                               c2.threshold, c2.stop ? "stop_both" : "stop_first"});
        if (c2.stop) {
          res.sigma = n;
          break;
        }
      } else if (want_trace) {
        res.trace.push_back({static_cast<int>(n), false, c1.payoff, false, 0.0, 0.0,
                             "continue"});
      }
    } else {
      const SecondStopCheck c2 =
          second_stop_rule(spec, policy, st, static_cast<int>(res.tau));
      if (want_trace)
        res.trace.push_back({static_cast<int>(n), true, 0.0, true, c2.statistic, c2.threshold,
                             c2.zero_mass ? "zero_pair_mass"
                                          : (c2.stop ? "stop_second" : "continue")});
      if (c2.stop) {
        res.sigma = n;
        break;
      }
    }
  }
  return res;
}

/// Fills hit1/hit2 against known ground truth.
inline void score_detection(DetectionResult& res, std::int64_t theta1, std::int64_t theta2) {
  res.hit1 = (res.tau != kNeverStopped && res.tau == theta1);
  res.hit2 = (res.sigma != kNeverStopped && res.sigma == theta2);
}

/// Records the detector's decisions on every prefix up to `horizon` as an
/// oracle-style table, so evaluate_policy_exact can price it.
inline OraclePolicyTable tabulate_detector(const ModelSpec& spec, const StoppingPolicy& policy,
                                           int horizon) {
  OraclePolicyTable table;
  table.horizon = horizon;
  detail::for_each_full_path(spec, horizon, [&](const std::vector<int>& path) {
    const DetectionResult res = run_detector(spec, policy, path, horizon);
    std::vector<int> prefix;
    for (int n = 0; n <= horizon; ++n) {
      prefix.push_back(path[n]);
      table.stop_first[prefix] = (res.tau != kNeverStopped && n >= res.tau);
      if (res.tau != kNeverStopped && n >= res.tau)
        table.stop_second[{static_cast<int>(res.tau), prefix}] =
            (res.sigma != kNeverStopped && n >= res.sigma);
    }
  });
  return table;
}

/// Exact P(tau = theta1, sigma = theta2) of the detector on the horizon-N
/// problem, by direct summation over all paths.
inline double exact_detector_value(const ModelSpec& spec, const StoppingPolicy& policy,
                                   int horizon) {
  if (std::pow(spec.alphabet_size, horizon) > kPolicyMaxPaths)
    throw guard_error("exact_detector_value: path count exceeds guard");
  double value = 0.0;
  detail::for_each_full_path(spec, horizon, [&](const std::vector<int>& path) {
    const DetectionResult res = run_detector(spec, policy, path, horizon);
    if (res.tau == kNeverStopped || res.sigma == kNeverStopped) return;
    value += joint_path_density(spec, path, res.tau, res.sigma);
  });
  return value;
}

}  // namespace disorder
