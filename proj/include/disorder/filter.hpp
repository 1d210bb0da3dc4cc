#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "disorder/likelihood.hpp"
#include "disorder/model.hpp"

namespace disorder {

/// Raised when an observation has zero one-step density under the model:
/// the data contradicts the model and silent renormalization would hide it.
class zero_likelihood_error : public std::runtime_error {
 public:
  zero_likelihood_error(int time, int from, int to)
      : std::runtime_error("zero-likelihood observation at n=" + std::to_string(time) +
                           ": transition " + std::to_string(from) + " -> " +
                           std::to_string(to)),
        time(time),
        from(from),
        to(to) {}
  int time, from, to;
};

/// Filter state after observing X_0..X_time.
struct FilterState {
  int time = 0;
  int prev_obs = 0;  // X_{time-1}; equals X_0 at time 0
  int cur_obs = 0;   // X_time
  BeliefVector belief;
  // pair_beliefs[m][u] = P(theta1 = m, theta2 > time, regime = u | F_time).
  // An entry is spawned when the filter passes time m and pruned once its
  // total mass drops below the prune threshold.
  std::map<int, std::vector<double>> pair_beliefs;
};

struct FilterOptions {
  double prune_threshold = 1e-15;
};

/// Boundary values at n = 0:
///   pi1  = pi * r,  pi2 = pi * rho * r,
///   pi12 = (1-pi) * rho * r,  upsilon = r,
/// and the m = 0 pair posterior pi * (1-rho) * r (theta1 = 0, theta2 > 0).
inline FilterState init_filter(const ModelSpec& spec) {
  FilterState st;
  st.time = 0;
  st.prev_obs = st.cur_obs = spec.initial_state;
  const int K = spec.regime_count;
  st.belief.pi1.resize(K);
  st.belief.pi2.resize(K);
  st.belief.pi12.resize(K);
  st.belief.upsilon.resize(K);
  std::vector<double> pair0(K);
  for (int u = 0; u < K; ++u) {
    const double r = spec.regime_prior[u];
    st.belief.pi1[u] = spec.pi * r;
    st.belief.pi2[u] = spec.pi * spec.rho * r;
    st.belief.pi12[u] = (1.0 - spec.pi) * spec.rho * r;
    st.belief.upsilon[u] = r;
    pair0[u] = spec.pi * (1.0 - spec.rho) * r;
  }
  if (total(pair0) > 0.0) st.pair_beliefs.emplace(0, std::move(pair0));
  return st;
}

/// One filter update after observing y at time n+1.  All posteriors divide
/// by the one-step density H; the regime marginal is the per-regime share
/// H_u / H, and a fresh pair posterior is spawned at m = n+1 with mass
/// q1 (upsilon - pi1 - pi12) f1[u] / H.
inline FilterState step_filter(const ModelSpec& spec, const FilterState& state, int y,
                               const FilterOptions& opts = {}) {
  const int K = spec.regime_count;
  const int x = state.cur_obs;
  const BeliefVector& b = state.belief;
  const double h = transition_weight(spec, x, y, b);
  if (!(h > 0.0)) throw zero_likelihood_error(state.time + 1, x, y);

  FilterState next;
  next.time = state.time + 1;
  next.prev_obs = x;
  next.cur_obs = y;
  next.belief.pi1.resize(K);
  next.belief.pi2.resize(K);
  next.belief.pi12.resize(K);
  next.belief.upsilon.resize(K);

  std::vector<double> spawn(K);
  for (int u = 0; u < K; ++u) {
    const double a = b.pi1[u];
    const double bb = b.pi2[u];
    const double g = b.pi12[u];
    const double ups = b.upsilon[u];
    const double f0 = spec.kernel_pre[x][y];
    const double f1 = spec.kernel_mid[u][x][y];
    const double f2 = spec.kernel_post[x][y];

    const double hu = regime_transition_weight(spec, x, y, b, u);
    const double not_yet = spec.p1 * (ups - a) * f0 / h;  // P(theta1 > n+1, u | F_{n+1})
    next.belief.upsilon[u] = hu / h;
    next.belief.pi1[u] = hu / h - not_yet;
    next.belief.pi2[u] = (spec.q2 * a + spec.p2 * bb + spec.q1 * g) * f2 / h;
    next.belief.pi12[u] = spec.p1 * g * f0 / h;
    spawn[u] = spec.q1 * (ups - a - g) * f1 / h;
  }

  for (const auto& [m, pair] : state.pair_beliefs) {
    std::vector<double> updated(K);
    double mass = 0.0;
    for (int u = 0; u < K; ++u) {
      updated[u] = spec.p2 * pair[u] * spec.kernel_mid[u][x][y] / h;
      mass += updated[u];
    }
    if (mass >= opts.prune_threshold) next.pair_beliefs.emplace(m, std::move(updated));
  }
  if (total(spawn) >= opts.prune_threshold) next.pair_beliefs.emplace(next.time, std::move(spawn));
  return next;
}

/// The spawned pair posterior in likelihood-ratio form,
/// (1-rho) (q1 f1[u] / (p1 f0)) (upsilon_m - pi1_m), evaluated with the
/// post-update beliefs at m.  Equal to the direct spawn in step_filter
/// because the filter preserves pi12 = rho (upsilon - pi1); kept as a
/// cross-check of that invariant.
inline std::vector<double> spawn_likelihood_ratio_form(const ModelSpec& spec,
                                                       const FilterState& post_step) {
  const int K = spec.regime_count;
  const int x = post_step.prev_obs;
  const int y = post_step.cur_obs;
  std::vector<double> out(K);
  for (int u = 0; u < K; ++u) {
    const double f0 = spec.kernel_pre[x][y];
    const double f1 = spec.kernel_mid[u][x][y];
    const double bar = post_step.belief.upsilon[u] - post_step.belief.pi1[u];
    out[u] = (1.0 - spec.rho) * spec.q1 * f1 / (spec.p1 * f0) * bar;
  }
  return out;
}

/// A tempting direct recursion for the regime marginal that turns out not to
/// normalize (the per-regime shares fail to sum to one).  step_filter uses
/// the per-regime density share H_u / H instead; this variant is retained so
/// the tests can document why.
inline std::vector<double> upsilon_update_naive(const ModelSpec& spec,
                                                const FilterState& state, int y) {
  const int K = spec.regime_count;
  const int x = state.cur_obs;
  const BeliefVector& b = state.belief;
  const double h = transition_weight(spec, x, y, b);
  std::vector<double> out(K);
  for (int u = 0; u < K; ++u) {
    const double f0 = spec.kernel_pre[x][y];
    const double f1 = spec.kernel_mid[u][x][y];
    const double f2 = spec.kernel_post[x][y];
    out[u] = (f0 * (b.upsilon[u] - spec.q1 * b.pi12[u]) +
              f1 * spec.p2 * (b.pi1[u] - b.pi2[u]) +
              f2 * (spec.q2 * (b.pi1[u] + b.pi2[u]) + b.pi2[u] + spec.q1 * b.pi12[u])) /
             h;
  }
  return out;
}

/// One-step predicted event probabilities given F_n (all per regime).
struct PredictedEventProbs {
  std::vector<double> coincident_after_next;  // P(theta2 = theta1 > n+1, u | F_n)
  std::vector<double> ordered_after_next;     // P(theta2 > theta1 > n+1, u | F_n)
  std::vector<double> first_by_next;          // P(theta1 <= n+1, u | F_n)
  std::vector<double> first_only_by_next;     // P(theta1 <= n+1 < theta2, u | F_n)
  std::vector<double> second_by_next;         // P(theta2 <= n+1, u | F_n)
};

inline PredictedEventProbs predicted_event_probs(const ModelSpec& spec,
                                                 const FilterState& state) {
  const int K = spec.regime_count;
  const BeliefVector& b = state.belief;
  PredictedEventProbs p;
  p.coincident_after_next.resize(K);
  p.ordered_after_next.resize(K);
  p.first_by_next.resize(K);
  p.first_only_by_next.resize(K);
  p.second_by_next.resize(K);
  for (int u = 0; u < K; ++u) {
    const double a = b.pi1[u];
    const double bb = b.pi2[u];
    const double g = b.pi12[u];
    const double ups = b.upsilon[u];
    p.coincident_after_next[u] = spec.p1 * g;
    p.ordered_after_next[u] = spec.p1 * (ups - a - g);
    p.first_only_by_next[u] = spec.q1 * (ups - a - g) + spec.p2 * (a - bb);
    p.second_by_next[u] = spec.q2 * a + spec.p2 * bb + spec.q1 * g;
    p.first_by_next[u] = p.first_only_by_next[u] + p.second_by_next[u];
  }
  return p;
}

inline double pair_mass(const FilterState& state) {
  double s = 0.0;
  for (const auto& [m, pair] : state.pair_beliefs) s += total(pair);
  return s;
}

inline void write_filter_trace_header(std::ostream& os) {
  os << "n,x,pi1,pi2,pi12,upsilon,pair_mass\n";
}

/// One diagnostics row: time, observation, aggregated posteriors, the
/// per-regime regime marginal (space separated) and the total pair mass.
inline void append_filter_trace_row(std::ostream& os, const FilterState& state) {
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
    os << buf;
  };
  os << state.time << ',' << state.cur_obs << ',';
  put(total(state.belief.pi1), ',');
  put(total(state.belief.pi2), ',');
  put(total(state.belief.pi12), ',');
  for (std::size_t u = 0; u < state.belief.upsilon.size(); ++u) {
    std::snprintf(buf, sizeof buf, "%.17g", state.belief.upsilon[u]);
    os << buf << (u + 1 < state.belief.upsilon.size() ? ' ' : ',');
  }
  put(pair_mass(state), '\n');
}

}  // namespace disorder
