#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace disorder {

/// Row-stochastic transition matrix over the finite observation alphabet.
using Kernel = std::vector<std::vector<double>>;

/// Raised when a model violates the standing assumptions.
class model_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Absolute tolerance for probability checks.  Stricter would reject
/// legitimate decimal inputs such as 0.1+0.2+0.7.
inline constexpr double kProbTol = 1e-12;

/// Switched Markov model with two ordered random change points.
///
/// The observed chain moves with kernel_pre while n < theta1, with one of
/// the kernel_mid regimes (drawn once from regime_prior) while
/// theta1 <= n < theta2, and with kernel_post from theta2 on.  Here "moves
/// with" refers to the transition into X_n.  The priors are
///   P(theta1 = j) = pi        for j = 0,
///                   (1-pi) p1^(j-1) q1   for j >= 1,
///   P(theta2 = k | theta1 = j) = rho     for k = j,
///                   (1-rho) p2^(k-j-1) q2  for k > j.
struct ModelSpec {
  int alphabet_size = 0;
  int regime_count = 0;
  Kernel kernel_pre;                 // f0
  std::vector<Kernel> kernel_mid;    // f1[u], one kernel per regime
  Kernel kernel_post;                // f2
  double pi = 0.0;
  double rho = 0.0;
  double p1 = 0.0, q1 = 0.0;
  double p2 = 0.0, q2 = 0.0;
  std::vector<double> regime_prior;  // r[u] = P(regime = u)
  int initial_state = 0;             // X_0
};

namespace detail {

inline void check_kernel(const Kernel& k, int n, const std::string& name) {
  if (static_cast<int>(k.size()) != n)
    throw model_error(name + ": expected " + std::to_string(n) + " rows, got " +
                      std::to_string(k.size()));
  for (int x = 0; x < n; ++x) {
    if (static_cast<int>(k[x].size()) != n)
      throw model_error(name + " row " + std::to_string(x) + ": wrong width");
    double sum = 0.0;
    for (int y = 0; y < n; ++y) {
      if (k[x][y] < -kProbTol || !std::isfinite(k[x][y]))
        throw model_error(name + " row " + std::to_string(x) +
                          ": negative entry at column " + std::to_string(y));
      sum += k[x][y];
    }
    if (std::abs(sum - 1.0) > kProbTol)
      throw model_error(name + " row " + std::to_string(x) + " not stochastic (sums to " +
                        std::to_string(sum) + ")");
  }
}

inline void check_probability(double p, const std::string& name) {
  if (!(p >= -kProbTol && p <= 1.0 + kProbTol))
    throw model_error(name + " not a probability: " + std::to_string(p));
}

}  // namespace detail

/// Checks every model invariant and returns the spec unchanged.  Throws
/// model_error naming the first violated invariant and its offending index.
inline ModelSpec validate_model(ModelSpec spec) {
  const int n = spec.alphabet_size;
  const int K = spec.regime_count;
  if (n < 1) throw model_error("alphabet_size must be positive");
  if (K < 1) throw model_error("regime_count must be positive");
  if (spec.initial_state < 0 || spec.initial_state >= n)
    throw model_error("initial_state outside alphabet");

  detail::check_kernel(spec.kernel_pre, n, "kernel_pre");
  if (static_cast<int>(spec.kernel_mid.size()) != K)
    throw model_error("kernel_mid: expected " + std::to_string(K) + " kernels");
  for (int u = 0; u < K; ++u)
    detail::check_kernel(spec.kernel_mid[u], n, "kernel_mid[" + std::to_string(u) + "]");
  detail::check_kernel(spec.kernel_post, n, "kernel_post");

  detail::check_probability(spec.pi, "pi");
  detail::check_probability(spec.rho, "rho");
  detail::check_probability(spec.p1, "p1");
  detail::check_probability(spec.q1, "q1");
  detail::check_probability(spec.p2, "p2");
  detail::check_probability(spec.q2, "q2");
  if (std::abs(spec.p1 + spec.q1 - 1.0) > kProbTol) throw model_error("p1 + q1 != 1");
  if (std::abs(spec.p2 + spec.q2 - 1.0) > kProbTol) throw model_error("p2 + q2 != 1");

  if (static_cast<int>(spec.regime_prior.size()) != K)
    throw model_error("regime_prior: expected " + std::to_string(K) + " entries");
  double rsum = 0.0;
  for (int u = 0; u < K; ++u) {
    if (spec.regime_prior[u] < -kProbTol)
      throw model_error("regime_prior entry " + std::to_string(u) + " negative");
    rsum += spec.regime_prior[u];
  }
  if (std::abs(rsum - 1.0) > kProbTol) throw model_error("regime_prior does not sum to 1");

  // Density-ratio finiteness: where any kernel puts mass, all of them must.
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      bool any = spec.kernel_pre[x][y] > 0.0 || spec.kernel_post[x][y] > 0.0;
      bool all = spec.kernel_pre[x][y] > 0.0 && spec.kernel_post[x][y] > 0.0;
      for (int u = 0; u < K; ++u) {
        any = any || spec.kernel_mid[u][x][y] > 0.0;
        all = all && spec.kernel_mid[u][x][y] > 0.0;
      }
      if (any && !all)
        throw model_error("density-ratio assumption broken at transition (" +
                          std::to_string(x) + "," + std::to_string(y) + ")");
    }
  return spec;
}

/// P(theta1 = j).
inline double prior_theta1_pmf(const ModelSpec& spec, std::int64_t j) {
  if (j < 0) return 0.0;
  if (j == 0) return spec.pi;
  return (1.0 - spec.pi) * std::pow(spec.p1, static_cast<double>(j - 1)) * spec.q1;
}

/// P(theta1 > n); n = -1 gives 1.
inline double prior_theta1_tail(const ModelSpec& spec, std::int64_t n) {
  if (n < 0) return 1.0;
  return (1.0 - spec.pi) * std::pow(spec.p1, static_cast<double>(n));
}

/// P(theta2 = k | theta1 = j); requires k >= j.
inline double prior_theta2_given_theta1_pmf(const ModelSpec& spec, std::int64_t j,
                                            std::int64_t k) {
  if (k < j) throw std::domain_error("prior_theta2_given_theta1_pmf: k < j");
  if (k == j) return spec.rho;
  return (1.0 - spec.rho) * std::pow(spec.p2, static_cast<double>(k - j - 1)) * spec.q2;
}

/// P(theta2 > n | theta1 = j) for n >= j.
inline double prior_theta2_tail(const ModelSpec& spec, std::int64_t j, std::int64_t n) {
  if (n < j) return 1.0;
  return (1.0 - spec.rho) * std::pow(spec.p2, static_cast<double>(n - j));
}

/// P(regime = u).
inline double regime_prior_pmf(const ModelSpec& spec, int u) {
  if (u < 0 || u >= spec.regime_count)
    throw std::domain_error("regime index out of range: " + std::to_string(u));
  return spec.regime_prior[u];
}

}  // namespace disorder
