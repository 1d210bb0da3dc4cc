#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "disorder/detect.hpp"
#include "disorder/model.hpp"
#include "disorder/simulate.hpp"
#include "disorder/solver.hpp"

namespace disorder {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson 95% score interval; behaves sensibly near 0 and 1 where the Wald
/// interval collapses.
inline WilsonInterval wilson_ci_95(std::int64_t successes, std::int64_t n) {
  if (n <= 0) throw std::domain_error("wilson_ci_95: n must be positive");
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct EvaluationReport {
  std::int64_t n_runs = 0;
  double detection_prob_estimate = 0.0;
  WilsonInterval wilson;
  double mean_tau_error = 0.0;    // mean of tau - theta1 over scored runs
  double mean_sigma_error = 0.0;  // mean of sigma - theta2 over scored runs
  std::int64_t tau_error_count = 0;
  std::int64_t sigma_error_count = 0;
  bool has_exact = false;
  double oracle_value = 0.0;
  double policy_value_exact = 0.0;
  std::string config_digest;
  std::uint64_t seed_begin = 0;
  std::uint64_t seed_end = 0;  // exclusive
  std::int64_t horizon = 0;
};

/// Ten times the prior mean of theta2, the default detection horizon.
inline std::int64_t default_detection_horizon(const ModelSpec& spec) {
  if (spec.q1 <= 0.0 || spec.q2 <= 0.0)
    throw std::domain_error(
        "default_detection_horizon: prior mean is infinite, pass an explicit horizon");
  const double mean_theta2 = (1.0 - spec.pi) / spec.q1 + (1.0 - spec.rho) / spec.q2;
  return std::max<std::int64_t>(10, static_cast<std::int64_t>(std::ceil(10.0 * mean_theta2)));
}

/// Monte Carlo estimate of P(tau = theta1, sigma = theta2) over trajectories
/// seeded seed, seed+1, ...; "never" outcomes score as misses.  Aggregation
/// is a pure sum keyed by seed, so the result is reproducible regardless of
/// evaluation order.
inline EvaluationReport evaluate_policy_mc(const ModelSpec& spec, const StoppingPolicy& policy,
                                           std::int64_t n_runs, std::uint64_t seed,
                                           std::int64_t horizon) {
  if (n_runs < 100)
    throw std::domain_error("evaluate_policy_mc: fewer than 100 runs gives a meaningless interval");
  if (horizon < 1 || horizon > 10000000)
    throw std::domain_error("evaluate_policy_mc: horizon out of range; pass an explicit one");
  EvaluationReport rep;
  rep.n_runs = n_runs;
  rep.horizon = horizon;
  rep.seed_begin = seed;
  rep.seed_end = seed + static_cast<std::uint64_t>(n_runs);

  std::int64_t hits = 0;
  double tau_err_sum = 0.0, sigma_err_sum = 0.0;
  for (std::int64_t i = 0; i < n_runs; ++i) {
    const Trajectory traj =
        sample_trajectory(spec, static_cast<int>(horizon), seed + static_cast<std::uint64_t>(i));
    DetectionResult res = run_detector(spec, policy, traj.observations, horizon);
    score_detection(res, traj.theta1, traj.theta2);
    if (res.hit1 && res.hit2) ++hits;
    if (res.tau != kNeverStopped && traj.theta1 <= horizon) {
      tau_err_sum += static_cast<double>(res.tau - traj.theta1);
      ++rep.tau_error_count;
    }
    if (res.sigma != kNeverStopped && traj.theta2 <= horizon) {
      sigma_err_sum += static_cast<double>(res.sigma - traj.theta2);
      ++rep.sigma_error_count;
    }
  }
  rep.detection_prob_estimate = static_cast<double>(hits) / static_cast<double>(n_runs);
  rep.wilson = wilson_ci_95(hits, n_runs);
  if (rep.tau_error_count > 0) rep.mean_tau_error = tau_err_sum / rep.tau_error_count;
  if (rep.sigma_error_count > 0) rep.mean_sigma_error = sigma_err_sum / rep.sigma_error_count;
  return rep;
}

}  // namespace disorder
