#pragma once

#include <cmath>
#include <vector>

#include "disorder/likelihood.hpp"
#include "disorder/model.hpp"
#include "disorder/rng.hpp"

namespace disorder::testing {

// Canonical two-state, single-regime model used throughout the suites:
// informative pre kernel, uninformative mid, anti-diagonal post.
inline ModelSpec tiny_model() {
  ModelSpec spec;
  spec.alphabet_size = 2;
  spec.regime_count = 1;
  spec.kernel_pre = {{0.9, 0.1}, {0.1, 0.9}};
  spec.kernel_mid = {{{0.5, 0.5}, {0.5, 0.5}}};
  spec.kernel_post = {{0.1, 0.9}, {0.9, 0.1}};
  spec.pi = 0.0;
  spec.rho = 0.0;
  spec.p1 = 0.8;
  spec.q1 = 0.2;
  spec.p2 = 0.7;
  spec.q2 = 0.3;
  spec.regime_prior = {1.0};
  spec.initial_state = 0;
  return validate_model(std::move(spec));
}

inline Kernel random_kernel(CounterRng& rng, int n, double floor = 0.05) {
  Kernel k(n, std::vector<double>(n));
  for (int x = 0; x < n; ++x) {
    double sum = 0.0;
    for (int y = 0; y < n; ++y) {
      k[x][y] = floor + rng.next_double();
      sum += k[x][y];
    }
    for (int y = 0; y < n; ++y) k[x][y] /= sum;
  }
  return k;
}

// Randomized model with strictly positive kernels so the density-ratio
// assumption always holds.
inline ModelSpec random_model(std::uint64_t seed, int alphabet, int regimes) {
  CounterRng rng = CounterRng(seed).split(0x6d6f64656cULL);
  ModelSpec spec;
  spec.alphabet_size = alphabet;
  spec.regime_count = regimes;
  spec.kernel_pre = random_kernel(rng, alphabet);
  for (int u = 0; u < regimes; ++u) spec.kernel_mid.push_back(random_kernel(rng, alphabet));
  spec.kernel_post = random_kernel(rng, alphabet);
  spec.pi = 0.5 * rng.next_double();
  spec.rho = 0.5 * rng.next_double();
  spec.p1 = 0.4 + 0.5 * rng.next_double();
  spec.q1 = 1.0 - spec.p1;
  spec.p2 = 0.4 + 0.5 * rng.next_double();
  spec.q2 = 1.0 - spec.p2;
  spec.regime_prior.assign(regimes, 0.0);
  double sum = 0.0;
  for (int u = 0; u < regimes; ++u) {
    spec.regime_prior[u] = 0.2 + rng.next_double();
    sum += spec.regime_prior[u];
  }
  for (int u = 0; u < regimes; ++u) spec.regime_prior[u] /= sum;
  spec.initial_state = static_cast<int>(rng.next_u64() % alphabet);
  return validate_model(std::move(spec));
}

// TINY-shaped randomized models (2 states, one regime, pi = 0) for the
// desk-scale optimality comparisons.
inline ModelSpec random_tiny_class_model(std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split(0x74696e79ULL);
  ModelSpec spec = tiny_model();
  spec.kernel_pre = random_kernel(rng, 2, 0.08);
  spec.kernel_mid[0] = random_kernel(rng, 2, 0.08);
  spec.kernel_post = random_kernel(rng, 2, 0.08);
  spec.rho = 0.3 * rng.next_double();
  spec.p1 = 0.6 + 0.3 * rng.next_double();
  spec.q1 = 1.0 - spec.p1;
  spec.p2 = 0.5 + 0.3 * rng.next_double();
  spec.q2 = 1.0 - spec.p2;
  return validate_model(std::move(spec));
}

// Valid belief sampled uniformly inside the constraint set.
inline BeliefVector random_belief(CounterRng& rng, int regimes) {
  BeliefVector b;
  b.upsilon.resize(regimes);
  double sum = 0.0;
  for (int u = 0; u < regimes; ++u) {
    b.upsilon[u] = 0.05 + rng.next_double();
    sum += b.upsilon[u];
  }
  for (int u = 0; u < regimes; ++u) b.upsilon[u] /= sum;
  b.pi1.resize(regimes);
  b.pi2.resize(regimes);
  b.pi12.resize(regimes);
  for (int u = 0; u < regimes; ++u) {
    b.pi1[u] = b.upsilon[u] * rng.next_double();
    b.pi2[u] = b.pi1[u] * rng.next_double();
    b.pi12[u] = (b.upsilon[u] - b.pi1[u]) * rng.next_double();
  }
  return b;
}

inline double chi_square_stat(const std::vector<double>& observed,
                              const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

// 99th percentile of chi-square via the Wilson-Hilferty cube approximation;
// plenty accurate for the df used here.
inline double chi2_crit_99(double df) {
  const double z = 2.3263478740408408;
  const double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
  return df * t * t * t;
}

}  // namespace disorder::testing
