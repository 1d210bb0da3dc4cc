#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "disorder/model.hpp"

namespace disorder {

/// Per-regime posterior masses at a fixed time n.  With alpha = pi1,
/// beta = pi2, gamma = pi12, upsilon below:
///   pi1[u]     = P(theta1 <= n, regime = u | F_n)
///   pi2[u]     = P(theta2 <= n, regime = u | F_n)
///   pi12[u]    = P(theta1 = theta2 > n, regime = u | F_n)
///   upsilon[u] = P(regime = u | F_n)
/// Valid states satisfy 0 <= pi2 <= pi1 <= upsilon, pi12 <= upsilon - pi1
/// componentwise and sum(upsilon) = 1.
struct BeliefVector {
  std::vector<double> pi1;
  std::vector<double> pi2;
  std::vector<double> pi12;
  std::vector<double> upsilon;
};

inline double total(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

/// Log-likelihood of a path under fixed segment boundaries: the first
/// `split1` transitions use kernel_pre, the next `split2 - split1` use
/// kernel_mid[u], the rest kernel_post.  Equivalently, the transition from
/// path[i] to path[i+1] is pre when i < split1, mid when split1 <= i < split2
/// and post otherwise.  Empty segments contribute the empty-product 1.
/// Ground-truth change points (theta1, theta2) map to splits
/// (max(theta1-1,0), max(theta2-1,0)).  A zero-probability transition yields
/// -infinity.
inline double segment_log_likelihood(const ModelSpec& spec, std::span<const int> path,
                                     std::int64_t split1, std::int64_t split2, int u) {
  if (split1 > split2) throw std::domain_error("segment_log_likelihood: split1 > split2");
  if (u < 0 || u >= spec.regime_count)
    throw std::domain_error("segment_log_likelihood: regime out of range");
  double log_l = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const std::int64_t src = static_cast<std::int64_t>(i);
    const Kernel& k = (src < split1)   ? spec.kernel_pre
                      : (src < split2) ? spec.kernel_mid[u]
                                       : spec.kernel_post;
    const double p = k[path[i]][path[i + 1]];
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    log_l += std::log(p);
  }
  return log_l;
}

namespace detail {

// Linear-space likelihood of path given (theta1 = j, theta2 = k, regime u),
// using the transition-into convention.  k may exceed the horizon.
inline double path_likelihood(const ModelSpec& spec, std::span<const int> path,
                              std::int64_t j, std::int64_t k, int u) {
  double l = 1.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const std::int64_t n = static_cast<std::int64_t>(i);
    const Kernel& kern = (n >= k)   ? spec.kernel_post
                         : (n >= j) ? spec.kernel_mid[u]
                                    : spec.kernel_pre;
    l *= kern[path[i - 1]][path[i]];
    if (l == 0.0) return 0.0;
  }
  return l;
}

}  // namespace detail

/// The four unnormalized joint densities of the path under the disorder
/// configurations {theta1<=theta2<=n}, {theta1<=n<theta2}, {theta1=theta2>n}
/// and {n<theta1<theta2}.  Their sum is the full path density S_n.
struct ConfigurationDensities {
  double both_by_n = 0.0;           // theta1 <= theta2 <= n
  double first_only_by_n = 0.0;     // theta1 <= n < theta2
  double coincident_after_n = 0.0;  // theta1 = theta2 > n
  double ordered_after_n = 0.0;     // n < theta1 < theta2

  double sum() const { return both_by_n + first_only_by_n + coincident_after_n + ordered_after_n; }
};

/// Computes the four configuration densities exactly.  Tails over theta2 > n
/// and theta1 > n use closed-form geometric masses; beyond the horizon the
/// likelihood no longer depends on the change points.
inline ConfigurationDensities configuration_densities(const ModelSpec& spec,
                                                      std::span<const int> path) {
  if (path.empty()) throw std::domain_error("configuration_densities: empty path");
  const std::int64_t n = static_cast<std::int64_t>(path.size()) - 1;
  ConfigurationDensities out;

  // All-pre likelihood is regime independent.
  const double all_pre = detail::path_likelihood(spec, path, n + 1, n + 2, 0);
  out.coincident_after_n = spec.rho * prior_theta1_tail(spec, n) * all_pre;
  out.ordered_after_n = (1.0 - spec.rho) * prior_theta1_tail(spec, n) * all_pre;

  for (int u = 0; u < spec.regime_count; ++u) {
    const double ru = spec.regime_prior[u];
    if (ru == 0.0) continue;
    for (std::int64_t j = 0; j <= n; ++j) {
      const double pj = prior_theta1_pmf(spec, j);
      if (pj == 0.0) continue;
      for (std::int64_t k = j; k <= n; ++k) {
        const double w = pj * prior_theta2_given_theta1_pmf(spec, j, k);
        if (w == 0.0) continue;
        out.both_by_n += ru * w * detail::path_likelihood(spec, path, j, k, u);
      }
      const double tail = pj * prior_theta2_tail(spec, j, n);
      if (tail > 0.0)
        out.first_only_by_n += ru * tail * detail::path_likelihood(spec, path, j, n + 1, u);
    }
  }
  return out;
}

/// Per-regime one-step transition weight
///   H_u(x, y, belief) = (ups-a) p1 f0 + [p2(a-b) + q1(ups-a-g)] f1[u]
///                       + [q2 a + p2 b + q1 g] f2
/// evaluated at the regime-u components of the belief.
inline double regime_transition_weight(const ModelSpec& spec, int x, int y,
                                       const BeliefVector& belief, int u) {
  const double a = belief.pi1[u];
  const double b = belief.pi2[u];
  const double g = belief.pi12[u];
  const double ups = belief.upsilon[u];
  return (ups - a) * spec.p1 * spec.kernel_pre[x][y] +
         (spec.p2 * (a - b) + spec.q1 * (ups - a - g)) * spec.kernel_mid[u][x][y] +
         (spec.q2 * a + spec.p2 * b + spec.q1 * g) * spec.kernel_post[x][y];
}

/// One-step predictive density H(x, y, belief) = sum_u H_u: the conditional
/// density of observing y next given the path so far.  Normalizes every
/// posterior update; sums to 1 over y for any valid belief.
inline double transition_weight(const ModelSpec& spec, int x, int y,
                                const BeliefVector& belief) {
  double h = 0.0;
  for (int u = 0; u < spec.regime_count; ++u)
    h += regime_transition_weight(spec, x, y, belief, u);
  return h;
}

/// Aggregate form of H with the pre/post coefficients summed over regimes
/// first.  Kept as an algebraic cross-check against the per-regime sum; the
/// two coincide whenever kernel_pre and kernel_post are regime independent
/// (always true in this model family).
inline double transition_weight_aggregate_form(const ModelSpec& spec, int x, int y,
                                               const BeliefVector& belief) {
  const double a = total(belief.pi1);
  const double b = total(belief.pi2);
  const double g = total(belief.pi12);
  double h = (1.0 - a) * spec.p1 * spec.kernel_pre[x][y] +
             (spec.q2 * a + spec.p2 * b + spec.q1 * g) * spec.kernel_post[x][y];
  for (int u = 0; u < spec.regime_count; ++u)
    h += (spec.p2 * (belief.pi1[u] - belief.pi2[u]) +
          spec.q1 * (belief.upsilon[u] - belief.pi1[u] - belief.pi12[u])) *
         spec.kernel_mid[u][x][y];
  return h;
}

}  // namespace disorder
