#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "disorder/filter.hpp"
#include "disorder/likelihood.hpp"
#include "disorder/model.hpp"

namespace disorder {

class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  int resolution = 21;  // nodes per direction dimension when regime_count > 1
};

struct SweepDelta {
  int sweep = 0;
  double delta = 0.0;
};

/// Solved double-stopping policy.
///
/// Second stop.  r_star(t, u, d) is the fixed point of
///   r = max{ <d, f2_t(u)/f1_t(u)>, p2 sum_s <d, f1_u(s)> r(u, s, d'(s)) }
/// over pair-belief directions d on the regime simplex, where d'(s) is the
/// direction after observing s.  R_tilde(t, d) is the continuation kernel
/// sum_s <d, f1_t(s)> r(t, s, d'(s)) and R_star = p2 R_tilde.  The optimal
/// second stop fires once the normalized pair-belief statistic
/// <d, f2/f1> reaches R_star at the current observation.  R_rho_star folds
/// the stop-at-m atom: max{rho <d, f2/f1>, q2 (1-rho) R_tilde}.
///
/// First stop.  Before the first stop the per-regime no-change masses stay
/// proportional to the regime prior, so the value of the first-stop problem
/// is P(theta1 > n | F_n) times a fixed table over the last transition.
/// Tables below are scaled by the previous step's no-change mass to stay
/// finite for all parameter values:
///   first_stop_payoff(t, u)       = q1 <r, f1_t(u)> R_rho_star(t, u, d(t,u))
///   first_stop_continuation(t)    = sum_s max{payoff(t, s), p1 f0_t(s) cont(s)}
///   first_stop_value(t, u)        = max{payoff(t, u), p1 f0_t(u) cont(u)}
/// where d(t, u) is the spawn direction proportional to r_v f1v_t(u).  The
/// stopping set membership test is payoff(t, u) >= p1 f0_t(u) cont(u).
struct StoppingPolicy {
  int alphabet_size = 0;
  int regime_count = 0;
  int grid_resolution = 21;
  double tol = 1e-9;
  std::vector<double> regime_prior;  // frozen first-stop direction

  std::vector<double> r_star;      // [t][u][node]
  std::vector<double> R_tilde;     // [t][node]
  std::vector<double> R_star;      // [t][node]
  std::vector<double> R_rho_star;  // [t][u][node]

  std::vector<double> first_stop_payoff;        // [t][u]
  std::vector<double> first_stop_value;         // [t][u]
  std::vector<double> first_stop_continuation;  // [t]

  std::vector<SweepDelta> second_stop_log;
  std::vector<SweepDelta> first_stop_log;

  int direction_dims() const { return regime_count - 1; }
  int node_count() const {
    int c = 1;
    for (int d = 0; d < direction_dims(); ++d) c *= grid_resolution;
    return c;
  }
  std::size_t idx_tun(int t, int u, int node) const {
    return (static_cast<std::size_t>(t) * alphabet_size + u) * node_count() + node;
  }
  std::size_t idx_tn(int t, int node) const {
    return static_cast<std::size_t>(t) * node_count() + node;
  }
  std::size_t idx_tu(int t, int u) const {
    return static_cast<std::size_t>(t) * alphabet_size + u;
  }
};

namespace detail {

// Direction of a nonnegative vector; all-zero maps to the last vertex.
inline std::vector<double> normalize_direction(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  if (s <= 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    v.back() = 1.0;
    return v;
  }
  for (double& x : v) x /= s;
  return v;
}

// Grid node -> simplex direction.  Nodes are a uniform box grid over the
// first K-1 coordinates; nodes outside the simplex are projected onto it.
inline std::vector<double> node_direction(const StoppingPolicy& p, int node) {
  const int K = p.regime_count;
  std::vector<double> dir(K, 0.0);
  if (K == 1) {
    dir[0] = 1.0;
    return dir;
  }
  double sum = 0.0;
  for (int d = 0; d < K - 1; ++d) {
    dir[d] = static_cast<double>(node % p.grid_resolution) / (p.grid_resolution - 1);
    node /= p.grid_resolution;
    sum += dir[d];
  }
  if (sum <= 1.0) {
    dir[K - 1] = 1.0 - sum;
    return dir;
  }
  for (int d = 0; d < K - 1; ++d) dir[d] /= sum;
  return dir;
}

// Multilinear interpolation of a per-(t,u) slice of node values at an
// arbitrary simplex direction; a convex combination, hence nonexpansive.
inline double interpolate_nodes(const StoppingPolicy& p, const double* slice,
                                const std::vector<double>& dir) {
  const int dims = p.direction_dims();
  if (dims == 0) return slice[0];
  const int res = p.grid_resolution;
  double value = 0.0;
  const int corners = 1 << dims;
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    int node = 0;
    int stride = 1;
    for (int d = 0; d < dims; ++d) {
      double pos = dir[d] * (res - 1);
      if (pos < 0.0) pos = 0.0;
      if (pos > res - 1) pos = static_cast<double>(res - 1);
      int i0 = static_cast<int>(pos);
      if (i0 == res - 1) i0 = res - 2;
      const double frac = pos - i0;
      const bool hi = (c >> d) & 1;
      weight *= hi ? frac : (1.0 - frac);
      node += (i0 + (hi ? 1 : 0)) * stride;
      stride *= res;
    }
    value += weight * slice[node];
  }
  return value;
}

// <dir, f2_t(u) / f1_t(u)>: the second-stop payoff statistic.
inline double ratio_statistic(const ModelSpec& spec, int t, int u,
                              const std::vector<double>& dir) {
  double s = 0.0;
  for (int v = 0; v < spec.regime_count; ++v) {
    const double f1 = spec.kernel_mid[v][t][u];
    if (f1 > 0.0) s += dir[v] * spec.kernel_post[t][u] / f1;
  }
  return s;
}

// Direction after the pair belief absorbs the transition t -> s.
inline std::vector<double> advance_direction(const ModelSpec& spec, int t, int s,
                                             const std::vector<double>& dir) {
  std::vector<double> next(spec.regime_count);
  for (int v = 0; v < spec.regime_count; ++v) next[v] = dir[v] * spec.kernel_mid[v][t][s];
  return normalize_direction(std::move(next));
}

inline int max_sweeps_for(double tol, double contraction) {
  if (contraction <= 0.0) return 8;
  return static_cast<int>(std::ceil(std::log(tol) / std::log(contraction))) + 100;
}

}  // namespace detail

inline double r_star_at(const StoppingPolicy& p, int t, int u,
                        const std::vector<double>& dir) {
  return detail::interpolate_nodes(p, &p.r_star[p.idx_tun(t, u, 0)], dir);
}

inline double R_star_at(const StoppingPolicy& p, int t, const std::vector<double>& dir) {
  return detail::interpolate_nodes(p, &p.R_star[p.idx_tn(t, 0)], dir);
}

inline double R_tilde_at(const StoppingPolicy& p, int t, const std::vector<double>& dir) {
  return detail::interpolate_nodes(p, &p.R_tilde[p.idx_tn(t, 0)], dir);
}

inline double R_rho_at(const StoppingPolicy& p, int t, int u, const std::vector<double>& dir) {
  return detail::interpolate_nodes(p, &p.R_rho_star[p.idx_tun(t, u, 0)], dir);
}

/// Value iteration for the second-stop fixed point r*, then R~, R*, R*_rho.
/// Contraction factor p2; p2 = 1 cannot converge and is rejected.
inline StoppingPolicy solve_second_stop(const ModelSpec& spec, const GridConfig& grid = {},
                                        double tol = 1e-9) {
  if (spec.p2 >= 1.0)
    throw convergence_error("solve_second_stop: p2 = 1 gives no contraction");
  if (spec.regime_count > 1 && grid.resolution < 2)
    throw std::domain_error("solve_second_stop: grid resolution must be >= 2");

  StoppingPolicy p;
  p.alphabet_size = spec.alphabet_size;
  p.regime_count = spec.regime_count;
  p.grid_resolution = grid.resolution;
  p.tol = tol;
  p.regime_prior = spec.regime_prior;

  const int E = spec.alphabet_size;
  const int N = p.node_count();

  // Per-node geometry, fixed across sweeps.
  std::vector<std::vector<double>> node_dirs(N);
  for (int node = 0; node < N; ++node) node_dirs[node] = detail::node_direction(p, node);

  std::vector<double> payoff(static_cast<std::size_t>(E) * E * N);
  for (int t = 0; t < E; ++t)
    for (int u = 0; u < E; ++u)
      for (int node = 0; node < N; ++node)
        payoff[p.idx_tun(t, u, node)] = detail::ratio_statistic(spec, t, u, node_dirs[node]);

  // mixture[t][s][node] = <dir, f1_t(s)>, next_dir likewise precomputed.
  std::vector<double> mixture(static_cast<std::size_t>(E) * E * N);
  std::vector<std::vector<double>> next_dir(static_cast<std::size_t>(E) * E * N);
  for (int t = 0; t < E; ++t)
    for (int s = 0; s < E; ++s)
      for (int node = 0; node < N; ++node) {
        double mix = 0.0;
        for (int v = 0; v < spec.regime_count; ++v)
          mix += node_dirs[node][v] * spec.kernel_mid[v][t][s];
        const std::size_t i = p.idx_tun(t, s, node);
        mixture[i] = mix;
        if (mix > 0.0) next_dir[i] = detail::advance_direction(spec, t, s, node_dirs[node]);
      }

  p.r_star = payoff;  // iterate from the payoff floor
  std::vector<double> r_next(p.r_star.size());
  std::vector<double> r_tilde(static_cast<std::size_t>(E) * N);

  const int max_sweeps = detail::max_sweeps_for(tol, spec.p2);
  bool converged = false;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    // R~(t, node) under the current iterate.
    for (int t = 0; t < E; ++t)
      for (int node = 0; node < N; ++node) {
        double acc = 0.0;
        for (int s = 0; s < E; ++s) {
          const std::size_t i = p.idx_tun(t, s, node);
          if (mixture[i] > 0.0)
            acc += mixture[i] *
                   detail::interpolate_nodes(p, &p.r_star[p.idx_tun(t, s, 0)], next_dir[i]);
        }
        r_tilde[p.idx_tn(t, node)] = acc;
      }
    double delta = 0.0;
    for (int t = 0; t < E; ++t)
      for (int u = 0; u < E; ++u)
        for (int node = 0; node < N; ++node) {
          const std::size_t i = p.idx_tun(t, u, node);
          const double next =
              std::max(payoff[i], spec.p2 * r_tilde[p.idx_tn(u, node)]);
          delta = std::max(delta, std::abs(next - p.r_star[i]));
          r_next[i] = next;
        }
    p.r_star.swap(r_next);
    p.second_stop_log.push_back({sweep, delta});
    if (delta <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw convergence_error("solve_second_stop: no convergence after " +
                            std::to_string(max_sweeps) + " sweeps");

  // Final continuation tables from the converged iterate.
  p.R_tilde.assign(static_cast<std::size_t>(E) * N, 0.0);
  for (int t = 0; t < E; ++t)
    for (int node = 0; node < N; ++node) {
      double acc = 0.0;
      for (int s = 0; s < E; ++s) {
        const std::size_t i = p.idx_tun(t, s, node);
        if (mixture[i] > 0.0)
          acc += mixture[i] *
                 detail::interpolate_nodes(p, &p.r_star[p.idx_tun(t, s, 0)], next_dir[i]);
      }
      p.R_tilde[p.idx_tn(t, node)] = acc;
    }
  p.R_star.resize(p.R_tilde.size());
  for (std::size_t i = 0; i < p.R_tilde.size(); ++i) p.R_star[i] = spec.p2 * p.R_tilde[i];

  p.R_rho_star.resize(payoff.size());
  for (int t = 0; t < E; ++t)
    for (int u = 0; u < E; ++u)
      for (int node = 0; node < N; ++node) {
        const std::size_t i = p.idx_tun(t, u, node);
        p.R_rho_star[i] = std::max(spec.rho * payoff[i],
                                   spec.q2 * (1.0 - spec.rho) * p.R_tilde[p.idx_tn(u, node)]);
      }
  return p;
}

/// Spawn direction of the pair belief at a first stop on transition t -> u:
/// proportional to r_v f1v_t(u).
inline std::vector<double> spawn_direction(const ModelSpec& spec, int t, int u) {
  std::vector<double> d(spec.regime_count);
  for (int v = 0; v < spec.regime_count; ++v)
    d[v] = spec.regime_prior[v] * spec.kernel_mid[v][t][u];
  return detail::normalize_direction(std::move(d));
}

/// Value iteration for the first stop on the scaled E x E tables (see
/// StoppingPolicy docs).  Contraction factor p1.
inline void solve_first_stop(const ModelSpec& spec, StoppingPolicy& p) {
  if (spec.p1 >= 1.0 && spec.q1 > 0.0)
    throw convergence_error("solve_first_stop: p1 = 1 gives no contraction");
  const int E = spec.alphabet_size;

  p.first_stop_payoff.assign(static_cast<std::size_t>(E) * E, 0.0);
  for (int t = 0; t < E; ++t)
    for (int u = 0; u < E; ++u) {
      double mix = 0.0;
      for (int v = 0; v < spec.regime_count; ++v)
        mix += spec.regime_prior[v] * spec.kernel_mid[v][t][u];
      if (mix <= 0.0) continue;
      const std::vector<double> dir = spawn_direction(spec, t, u);
      p.first_stop_payoff[p.idx_tu(t, u)] = spec.q1 * mix * R_rho_at(p, t, u, dir);
    }

  // w(t) = sum_s max{payoff(t, s), p1 f0_t(s) w(s)}, from the stop-next floor.
  std::vector<double> w(E, 0.0), w_next(E, 0.0);
  for (int t = 0; t < E; ++t)
    for (int s = 0; s < E; ++s) w[t] += p.first_stop_payoff[p.idx_tu(t, s)];

  const int max_sweeps = detail::max_sweeps_for(p.tol, spec.p1);
  bool converged = false;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double delta = 0.0;
    for (int t = 0; t < E; ++t) {
      double acc = 0.0;
      for (int s = 0; s < E; ++s)
        acc += std::max(p.first_stop_payoff[p.idx_tu(t, s)],
                        spec.p1 * spec.kernel_pre[t][s] * w[s]);
      delta = std::max(delta, std::abs(acc - w[t]));
      w_next[t] = acc;
    }
    w.swap(w_next);
    p.first_stop_log.push_back({sweep, delta});
    if (delta <= p.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw convergence_error("solve_first_stop: no convergence after " +
                            std::to_string(max_sweeps) + " sweeps");

  p.first_stop_continuation = w;
  p.first_stop_value.resize(p.first_stop_payoff.size());
  for (int t = 0; t < E; ++t)
    for (int u = 0; u < E; ++u)
      p.first_stop_value[p.idx_tu(t, u)] =
          std::max(p.first_stop_payoff[p.idx_tu(t, u)],
                   spec.p1 * spec.kernel_pre[t][u] * w[u]);
}

inline StoppingPolicy solve_policy(const ModelSpec& spec, const GridConfig& grid = {},
                                   double tol = 1e-9) {
  StoppingPolicy p = solve_second_stop(spec, grid, tol);
  solve_first_stop(spec, p);
  return p;
}

/// P(theta1 = m, theta2 = n | F_n) evaluated from the filter state at n.
inline double payoff_xi(const ModelSpec& spec, int m, int n, const FilterState& state) {
  if (state.time != n) throw std::domain_error("payoff_xi: state is not at time n");
  if (m > n) throw std::domain_error("payoff_xi: m > n");
  if (m == 0 && n == 0) return spec.pi * spec.rho;
  const int t = state.prev_obs;
  const int u = state.cur_obs;
  if (n == m) {
    const double f0 = spec.kernel_pre[t][u];
    return spec.rho * (spec.q1 / spec.p1) * (spec.kernel_post[t][u] / f0) *
           (1.0 - total(state.belief.pi1));
  }
  auto it = state.pair_beliefs.find(m);
  if (it == state.pair_beliefs.end())
    throw std::domain_error("payoff_xi: no pair belief for m=" + std::to_string(m));
  double s = 0.0;
  for (int v = 0; v < spec.regime_count; ++v) {
    const double f1 = spec.kernel_mid[v][t][u];
    if (f1 > 0.0) s += it->second[v] * spec.kernel_post[t][u] / f1;
  }
  return (spec.q2 / spec.p2) * s;
}

struct SecondStopCheck {
  bool stop = false;
  bool zero_mass = false;
  double statistic = 0.0;
  double threshold = 0.0;
};

/// Threshold rule for the second stop with the first stop committed at m.
/// At n == m compares the stop-at-m atom against the deferred branch of
/// R*_rho; for n > m compares <d, f2/f1> against R* at the current state.
/// Ties stop.  Zero pair mass cannot be normalized: reports and continues.
inline SecondStopCheck second_stop_rule(const ModelSpec& spec, const StoppingPolicy& p,
                                        const FilterState& state, int m) {
  SecondStopCheck check;
  auto it = state.pair_beliefs.find(m);
  if (it == state.pair_beliefs.end() || !(total(it->second) > 0.0)) {
    check.zero_mass = true;
    return check;
  }
  const std::vector<double> dir = detail::normalize_direction(it->second);
  const int t = state.prev_obs;
  const int u = state.cur_obs;
  const double ratio = detail::ratio_statistic(spec, t, u, dir);
  if (state.time == m) {
    check.statistic = spec.rho * ratio;
    check.threshold = spec.q2 * (1.0 - spec.rho) * R_tilde_at(p, u, dir);
  } else {
    check.statistic = ratio;
    check.threshold = R_star_at(p, u, dir);
  }
  check.stop = check.statistic >= check.threshold;
  return check;
}

struct FirstStopCheck {
  bool stop = false;
  double payoff = 0.0;
  double continuation = 0.0;
};

/// Stopping-set membership for the first stop given the last transition
/// t -> u.  Both sides are scaled by the same no-change mass, which cancels.
inline FirstStopCheck first_stop_rule(const ModelSpec& spec, const StoppingPolicy& p, int t,
                                      int u) {
  FirstStopCheck check;
  check.payoff = p.first_stop_payoff[p.idx_tu(t, u)];
  check.continuation = spec.p1 * spec.kernel_pre[t][u] * p.first_stop_continuation[u];
  check.stop = check.payoff >= check.continuation;
  return check;
}

/// True when stopping both at time 0 is at least as good as deferring:
/// pi rho >= (1 - pi) sum_y q1 <r, f1_x(y)> R*_rho(x, y, d(x, y)).
/// The all-zero tie (pi rho = 0 = right side) breaks to continue.
inline bool immediate_stop_test(const ModelSpec& spec, const StoppingPolicy& p) {
  const int x = spec.initial_state;
  double rhs = 0.0;
  for (int y = 0; y < spec.alphabet_size; ++y)
    rhs += p.first_stop_payoff[p.idx_tu(x, y)];
  rhs *= (1.0 - spec.pi);
  const double lhs = spec.pi * spec.rho;
  if (lhs == 0.0 && rhs == 0.0) return false;
  return lhs >= rhs;
}

}  // namespace disorder
