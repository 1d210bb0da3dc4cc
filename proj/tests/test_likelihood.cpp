#include "disorder/likelihood.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "disorder/filter.hpp"
#include "disorder/oracle.hpp"
#include "test_support.hpp"

using namespace disorder;
using namespace disorder::testing;

namespace {

ModelSpec identical_kernel_model() {
  ModelSpec spec = tiny_model();
  spec.kernel_mid[0] = spec.kernel_pre;
  spec.kernel_post = spec.kernel_pre;
  spec.pi = 0.1;
  spec.rho = 0.2;
  return validate_model(spec);
}

}  // namespace

TEST_CASE("segment_log_likelihood on hand-checked products") {
  const ModelSpec spec = tiny_model();
  const std::vector<int> path1 = {0, 0, 1};
  CHECK(segment_log_likelihood(spec, path1, 3, 3, 0) ==
        Catch::Approx(std::log(0.9 * 0.1)).margin(1e-14));

  const std::vector<int> single = {1};
  CHECK(segment_log_likelihood(spec, single, 0, 0, 0) == 0.0);  // empty product

  const std::vector<int> path2 = {0, 1, 0};
  // first transition pre (f0: 0 -> 1 = 0.1), second mid (f1: 1 -> 0 = 0.5)
  CHECK(segment_log_likelihood(spec, path2, 1, 2, 0) ==
        Catch::Approx(std::log(0.1 * 0.5)).margin(1e-14));

  CHECK_THROWS_AS(segment_log_likelihood(spec, path2, 2, 1, 0), std::domain_error);
}

TEST_CASE("zero-probability transitions give -infinity, not an error") {
  ModelSpec spec = tiny_model();
  spec.kernel_pre = {{1.0, 0.0}, {0.0, 1.0}};
  spec.kernel_mid[0] = {{1.0, 0.0}, {0.0, 1.0}};
  spec.kernel_post = {{1.0, 0.0}, {0.0, 1.0}};
  spec = validate_model(spec);
  const std::vector<int> path = {0, 1};
  CHECK(segment_log_likelihood(spec, path, 9, 9, 0) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("configuration densities collapse when both disorders start at zero") {
  ModelSpec spec = tiny_model();
  spec.pi = 1.0;
  spec.rho = 1.0;
  spec = validate_model(spec);
  const std::vector<int> path = {0, 1, 1, 0};
  const ConfigurationDensities d = configuration_densities(spec, path);
  CHECK(d.first_only_by_n == 0.0);
  CHECK(d.coincident_after_n == 0.0);
  CHECK(d.ordered_after_n == 0.0);
  const double post_product = 0.9 * 0.1 * 0.9;  // f2 transitions 0->1, 1->1, 1->0
  CHECK(d.both_by_n == Catch::Approx(post_product).margin(1e-15));
}

TEST_CASE("identical kernels factor the likelihood out of each configuration") {
  const ModelSpec spec = identical_kernel_model();
  const std::vector<int> path = {0, 1, 1};
  const int n = 2;
  double path_prob = 1.0;
  for (int i = 1; i <= n; ++i) path_prob *= spec.kernel_pre[path[i - 1]][path[i]];

  const ConfigurationDensities d = configuration_densities(spec, path);
  CHECK(d.sum() == Catch::Approx(path_prob).margin(1e-14));

  // Prior masses of the four configurations, summed directly.
  double both = 0.0, first_only = 0.0;
  for (int j = 0; j <= n; ++j) {
    for (int k = j; k <= n; ++k)
      both += prior_theta1_pmf(spec, j) * prior_theta2_given_theta1_pmf(spec, j, k);
    first_only += prior_theta1_pmf(spec, j) * prior_theta2_tail(spec, j, n);
  }
  const double coincident = spec.rho * prior_theta1_tail(spec, n);
  const double ordered = (1.0 - spec.rho) * prior_theta1_tail(spec, n);
  CHECK(d.both_by_n == Catch::Approx(both * path_prob).margin(1e-14));
  CHECK(d.first_only_by_n == Catch::Approx(first_only * path_prob).margin(1e-14));
  CHECK(d.coincident_after_n == Catch::Approx(coincident * path_prob).margin(1e-14));
  CHECK(d.ordered_after_n == Catch::Approx(ordered * path_prob).margin(1e-14));
}

TEST_CASE("tiny path (0,1) densities match hand enumeration") {
  ModelSpec spec = tiny_model();
  spec.pi = 0.1;
  spec.rho = 0.2;
  spec = validate_model(spec);
  const std::vector<int> path = {0, 1};
  const ConfigurationDensities d = configuration_densities(spec, path);
  const double f0 = 0.1, f1 = 0.5, f2 = 0.9;  // the 0 -> 1 entries
  // theta2 <= 1: (0,0), (0,1), (1,1); theta1 <= 1 < theta2: theta1 in {0,1}.
  const double both = spec.pi * spec.rho * f2 +
                      spec.pi * (1.0 - spec.rho) * spec.q2 * f2 +
                      (1.0 - spec.pi) * spec.q1 * spec.rho * f2;
  const double first_only = spec.pi * (1.0 - spec.rho) * spec.p2 * f1 +
                            (1.0 - spec.pi) * spec.q1 * (1.0 - spec.rho) * f1;
  const double coincident = (1.0 - spec.pi) * spec.p1 * spec.rho * f0;
  const double ordered = (1.0 - spec.pi) * spec.p1 * (1.0 - spec.rho) * f0;
  CHECK(d.both_by_n == Catch::Approx(both).margin(1e-14));
  CHECK(d.first_only_by_n == Catch::Approx(first_only).margin(1e-14));
  CHECK(d.coincident_after_n == Catch::Approx(coincident).margin(1e-14));
  CHECK(d.ordered_after_n == Catch::Approx(ordered).margin(1e-14));
}

TEST_CASE("configuration densities agree with the enumeration oracle") {
  for (std::uint64_t seed : {1u, 2u}) {
    const ModelSpec spec = random_model(seed, 2, 2);
    const std::vector<int> path = {spec.initial_state, 1, 0, 1};
    const ConfigurationDensities d = configuration_densities(spec, path);
    const EnumerationTable t = enumerate_table(spec, path);
    double both = 0.0, first_only = 0.0, coincident = 0.0, ordered = 0.0;
    for (int u = 0; u < t.regime_count; ++u) {
      coincident += t.coincident_tail[u];
      ordered += t.ordered_tail[u];
      for (int j = 0; j <= t.horizon; ++j) {
        for (int k = j; k <= t.horizon; ++k) both += t.finite_at(j, k, u);
        first_only += t.theta2_tail[static_cast<std::size_t>(j) * t.regime_count + u];
      }
    }
    CHECK(d.both_by_n == Catch::Approx(both).margin(1e-10));
    CHECK(d.first_only_by_n == Catch::Approx(first_only).margin(1e-10));
    CHECK(d.coincident_after_n == Catch::Approx(coincident).margin(1e-10));
    CHECK(d.ordered_after_n == Catch::Approx(ordered).margin(1e-10));
    CHECK(d.sum() == Catch::Approx(t.normalizer).margin(1e-10));
  }
}

TEST_CASE("transition weight collapses to the common kernel") {
  const ModelSpec spec = identical_kernel_model();
  CounterRng rng(7);
  for (int i = 0; i < 50; ++i) {
    const BeliefVector b = random_belief(rng, 1);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        CHECK(transition_weight(spec, x, y, b) ==
              Catch::Approx(spec.kernel_pre[x][y]).margin(1e-14));
  }
}

TEST_CASE("transition weight with the change certainly past is the post kernel") {
  const ModelSpec spec = tiny_model();
  BeliefVector b;
  b.pi1 = {1.0};
  b.pi2 = {1.0};
  b.pi12 = {0.0};
  b.upsilon = {1.0};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      CHECK(transition_weight(spec, x, y, b) ==
            Catch::Approx(spec.kernel_post[x][y]).margin(1e-15));
}

TEST_CASE("transition weight normalizes at random valid beliefs") {
  for (std::uint64_t seed : {10u, 11u}) {
    const ModelSpec spec = random_model(seed, 3, 2);
    CounterRng rng(seed * 31 + 1);
    for (int i = 0; i < 1000; ++i) {
      const BeliefVector b = random_belief(rng, 2);
      for (int x = 0; x < spec.alphabet_size; ++x) {
        double sum = 0.0;
        for (int y = 0; y < spec.alphabet_size; ++y) sum += transition_weight(spec, x, y, b);
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
      }
    }
  }
}

TEST_CASE("aggregate H form equals the per-regime sum") {
  const ModelSpec spec = random_model(21, 3, 3);
  CounterRng rng(99);
  for (int i = 0; i < 200; ++i) {
    const BeliefVector b = random_belief(rng, 3);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y)
        CHECK(transition_weight(spec, x, y, b) ==
              Catch::Approx(transition_weight_aggregate_form(spec, x, y, b)).margin(1e-12));
  }
}

TEST_CASE("one-step density recursion S_{n+1} = H S_n on all short paths") {
  for (const ModelSpec& spec : {tiny_model(), random_model(5, 2, 2)}) {
    std::vector<int> path{spec.initial_state};
    FilterState st = init_filter(spec);
    auto walk = [&](auto&& self, const FilterState& state) -> void {
      const double s_n = configuration_densities(spec, path).sum();
      for (int y = 0; y < spec.alphabet_size; ++y) {
        const double h = transition_weight(spec, state.cur_obs, y, state.belief);
        path.push_back(y);
        const double s_next = configuration_densities(spec, path).sum();
        REQUIRE(std::abs(s_next - h * s_n) <= 1e-10 * std::max(s_next, 1e-30));
        if (static_cast<int>(path.size()) <= 5 && h > 0.0) self(self, step_filter(spec, state, y));
        path.pop_back();
      }
    };
    walk(walk, st);
  }
}
