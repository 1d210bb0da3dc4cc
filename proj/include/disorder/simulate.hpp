#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "disorder/model.hpp"
#include "disorder/rng.hpp"

namespace disorder {

/// Stand-in for an almost-surely-infinite change point (p = 1 with zero
/// success mass).  Larger than any usable horizon.
inline constexpr std::int64_t kFarFuture = std::int64_t{1} << 62;

/// One sampled run: observations plus the latent ground truth.
struct Trajectory {
  std::vector<int> observations;  // length horizon+1, observations[0] == initial_state
  std::int64_t theta1 = 0;
  std::int64_t theta2 = 0;
  int regime = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// Number of failures before the first success of a Bernoulli(1-p) sequence,
// by inverse CDF: P(G >= g) = p^g.
inline std::int64_t geometric_failures(double u, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return kFarFuture;
  const double g = std::floor(std::log1p(-u) / std::log(p));
  if (!(g >= 0.0)) return 0;
  if (g >= static_cast<double>(kFarFuture)) return kFarFuture;
  return static_cast<std::int64_t>(g);
}

}  // namespace detail

/// Draws (theta1, theta2) from the model priors.
inline std::pair<std::int64_t, std::int64_t> sample_change_points(const ModelSpec& spec,
                                                                  CounterRng& rng) {
  std::int64_t theta1 = 0;
  const double u1 = rng.next_double();
  if (u1 >= spec.pi) {
    const double v = (u1 - spec.pi) / (1.0 - spec.pi);
    theta1 = 1 + detail::geometric_failures(v, spec.p1);
  }
  std::int64_t theta2 = theta1;
  const double u2 = rng.next_double();
  if (u2 >= spec.rho) {
    const double v = (u2 - spec.rho) / (1.0 - spec.rho);
    theta2 = theta1 + 1 + detail::geometric_failures(v, spec.p2);
  }
  // Degenerate tails (p = 1) saturate instead of overflowing.
  theta1 = std::min(theta1, kFarFuture);
  theta2 = std::min(std::max(theta2, theta1), kFarFuture);
  return {theta1, theta2};
}

inline int sample_regime(const ModelSpec& spec, CounterRng& rng) {
  return sample_categorical(rng, spec.regime_prior);
}

/// Samples a full trajectory.  The transition into X_n uses kernel_pre while
/// n < theta1, kernel_mid[regime] while theta1 <= n < theta2 and kernel_post
/// from theta2 on; segments continue from the last state.  Pure function of
/// (spec, horizon, seed).
inline Trajectory sample_trajectory(const ModelSpec& spec, int horizon, std::uint64_t seed) {
  CounterRng rng(seed);
  Trajectory t;
  t.seed = seed;
  auto [theta1, theta2] = sample_change_points(spec, rng);
  t.theta1 = theta1;
  t.theta2 = theta2;
  t.regime = sample_regime(spec, rng);

  t.observations.reserve(horizon + 1);
  t.observations.push_back(spec.initial_state);
  for (int n = 1; n <= horizon; ++n) {
    const int x = t.observations.back();
    const Kernel& k = (n >= theta2)   ? spec.kernel_post
                      : (n >= theta1) ? spec.kernel_mid[t.regime]
                                      : spec.kernel_pre;
    t.observations.push_back(sample_categorical(rng, k[x]));
  }
  return t;
}

}  // namespace disorder
