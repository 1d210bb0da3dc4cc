#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "disorder/filter.hpp"
#include "disorder/likelihood.hpp"
#include "disorder/model.hpp"
#include "disorder/oracle.hpp"

namespace disorder {

struct CheckResult {
  std::string name;
  long cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass() const { return max_error <= tolerance; }
};

struct VerifyReport {
  int depth = 0;
  std::vector<CheckResult> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass(); });
  }
};

namespace detail {

inline void track(CheckResult& c, double err) {
  c.cases += 1;
  if (err > c.max_error) c.max_error = err;
}

}  // namespace detail

// Max abs difference between filter and enumeration posteriors.
inline double posterior_gap(const ModelSpec& spec, const FilterState& st,
                            const ExactPosteriors& ex) {
  double gap = 0.0;
  for (int u = 0; u < spec.regime_count; ++u) {
    gap = std::max(gap, std::abs(st.belief.pi1[u] - ex.belief.pi1[u]));
    gap = std::max(gap, std::abs(st.belief.pi2[u] - ex.belief.pi2[u]));
    gap = std::max(gap, std::abs(st.belief.pi12[u] - ex.belief.pi12[u]));
    gap = std::max(gap, std::abs(st.belief.upsilon[u] - ex.belief.upsilon[u]));
  }
  for (const auto& [m, exact_pair] : ex.pair_beliefs) {
    auto it = st.pair_beliefs.find(m);
    for (int u = 0; u < spec.regime_count; ++u) {
      const double filtered = (it == st.pair_beliefs.end()) ? 0.0 : it->second[u];
      gap = std::max(gap, std::abs(filtered - exact_pair[u]));
    }
  }
  return gap;
}

// Max violation of the conditional-expectation identities at one state, over
// all indicator test functions.  Expectations over X_{n+1} are computed with
// the one-step density H; right-hand sides use the pre-step beliefs.
inline double expectation_identity_gap(const ModelSpec& spec, const FilterState& st) {
  const int E = spec.alphabet_size;
  const int K = spec.regime_count;
  const int x = st.cur_obs;
  const BeliefVector& b = st.belief;

  std::vector<double> h(E);
  std::vector<FilterState> next(E);
  for (int y = 0; y < E; ++y) {
    h[y] = transition_weight(spec, x, y, b);
    if (h[y] > 0.0) next[y] = step_filter(spec, st, y);
  }

  double gap = 0.0;
  for (int e = 0; e < E; ++e) {  // g = indicator of e
    for (int u = 0; u < K; ++u) {
      const double a = b.pi1[u], bb = b.pi2[u], g12 = b.pi12[u], ups = b.upsilon[u];
      double lhs_bar1 = 0.0, lhs_bar12 = 0.0, lhs_mid = 0.0, lhs_post = 0.0, lhs_coin = 0.0;
      for (int y = 0; y < E; ++y) {
        if (!(h[y] > 0.0) || y != e) continue;
        const BeliefVector& nb = next[y].belief;
        lhs_bar1 += h[y] * (nb.upsilon[u] - nb.pi1[u]);
        lhs_bar12 += h[y] * (nb.upsilon[u] - nb.pi1[u] - nb.pi12[u]);
        lhs_mid += h[y] * (nb.pi1[u] - nb.pi2[u]);
        lhs_post += h[y] * nb.pi2[u];
        lhs_coin += h[y] * nb.pi12[u];
      }
      const double f0 = spec.kernel_pre[x][e];
      const double f1 = spec.kernel_mid[u][x][e];
      const double f2 = spec.kernel_post[x][e];
      gap = std::max(gap, std::abs(lhs_bar1 - spec.p1 * (ups - a) * f0));
      gap = std::max(gap, std::abs(lhs_bar12 - spec.p1 * (ups - a - g12) * f0));
      gap = std::max(gap, std::abs(lhs_mid - (spec.q1 * (ups - a - g12) +
                                              spec.p2 * (a - bb)) * f1));
      gap = std::max(gap, std::abs(lhs_post - (spec.q2 * a + spec.p2 * bb +
                                               spec.q1 * g12) * f2));
      gap = std::max(gap, std::abs(lhs_coin - spec.p1 * g12 * f0));
    }
  }
  return gap;
}

// Belief-shape invariants: monotone coupling, regime-marginal normalization
// and the decomposition of theta1<=n<theta2 over the pair posteriors.
inline double belief_invariant_gap(const ModelSpec& spec, const FilterState& st) {
  double gap = 0.0;
  double ups_sum = 0.0;
  for (int u = 0; u < spec.regime_count; ++u) {
    const double a = st.belief.pi1[u], b = st.belief.pi2[u];
    const double g = st.belief.pi12[u], ups = st.belief.upsilon[u];
    gap = std::max(gap, std::max(0.0, -b));
    gap = std::max(gap, std::max(0.0, b - a));
    gap = std::max(gap, std::max(0.0, a - ups));
    gap = std::max(gap, std::max(0.0, ups - 1.0));
    gap = std::max(gap, std::max(0.0, g - (ups - a)));
    ups_sum += ups;
  }
  gap = std::max(gap, std::abs(ups_sum - 1.0));
  gap = std::max(gap, std::abs(pair_mass(st) -
                               (total(st.belief.pi1) - total(st.belief.pi2))));
  return gap;
}

/// Exhaustive desk-scale verification: walks every observation path of the
/// given depth, comparing the filter against brute-force enumeration and
/// checking the algebraic identities the recursions must satisfy.
inline VerifyReport verify_model(const ModelSpec& spec, int depth) {
  if (depth < 1 || depth > kEnumerationMaxDepth)
    throw guard_error("verify_model: depth must be in [1, " +
                      std::to_string(kEnumerationMaxDepth) + "]");
  if (std::pow(spec.alphabet_size, depth) > kPolicyMaxPaths)
    throw guard_error("verify_model: path count exceeds guard");

  VerifyReport report;
  report.depth = depth;
  CheckResult posterior{"filter_vs_enumeration", 0, 0.0, 1e-10};
  CheckResult recsn{"one_step_density_recursion", 0, 0.0, 1e-10};
  CheckResult hnorm{"transition_weight_normalization", 0, 0.0, 1e-12};
  CheckResult identities{"expectation_identities", 0, 0.0, 1e-10};
  CheckResult shape{"belief_invariants", 0, 0.0, 1e-10};

  std::vector<int> path{spec.initial_state};
  auto walk = [&](auto&& self, const FilterState& st) -> void {
    const double s_n = configuration_densities(spec, path).sum();
    const ExactPosteriors ex = enumerate_posteriors(spec, path);
    detail::track(posterior, posterior_gap(spec, st, ex));
    detail::track(shape, belief_invariant_gap(spec, st));
    detail::track(identities, expectation_identity_gap(spec, st));

    double h_sum = 0.0;
    for (int y = 0; y < spec.alphabet_size; ++y) {
      const double h = transition_weight(spec, st.cur_obs, y, st.belief);
      h_sum += h;
      path.push_back(y);
      const double s_next = configuration_densities(spec, path).sum();
      detail::track(recsn, std::abs(s_next - h * s_n) / std::max(s_next, 1e-30));
      if (static_cast<int>(path.size()) - 1 <= depth && h > 0.0)
        self(self, step_filter(spec, st, y));
      path.pop_back();
    }
    detail::track(hnorm, std::abs(h_sum - 1.0));
  };
  walk(walk, init_filter(spec));

  report.checks = {posterior, recsn, hnorm, identities, shape};
  return report;
}

}  // namespace disorder
