#include "disorder/detect.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "disorder/simulate.hpp"
#include "test_support.hpp"

using namespace disorder;
using namespace disorder::testing;

TEST_CASE("certain immediate disorder stops both at zero") {
  ModelSpec spec = tiny_model();
  spec.pi = 1.0;
  spec.rho = 1.0;
  spec = validate_model(spec);
  const StoppingPolicy policy = solve_policy(spec);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Trajectory t = sample_trajectory(spec, 20, seed);
    DetectionResult res = run_detector(spec, policy, t.observations, 20, true);
    REQUIRE(res.tau == 0);
    REQUIRE(res.sigma == 0);
    REQUIRE(res.trace.size() == 1);
    REQUIRE(res.trace[0].action == "immediate_stop");
    score_detection(res, t.theta1, t.theta2);
    REQUIRE(res.hit1);
    REQUIRE(res.hit2);
  }
}

TEST_CASE("unreachable thresholds truncate with never") {
  const ModelSpec spec = tiny_model();
  StoppingPolicy policy = solve_policy(spec);
  // Starve the first stop: zero payoff against a positive continuation.
  std::fill(policy.first_stop_payoff.begin(), policy.first_stop_payoff.end(), 0.0);
  std::fill(policy.first_stop_continuation.begin(), policy.first_stop_continuation.end(), 1.0);
  const Trajectory t = sample_trajectory(spec, 30, 9);
  const DetectionResult res = run_detector(spec, policy, t.observations, 30);
  CHECK(res.tau == kNeverStopped);
  CHECK(res.sigma == kNeverStopped);
}

TEST_CASE("detection is deterministic") {
  const ModelSpec spec = tiny_model();
  const StoppingPolicy policy = solve_policy(spec);
  const Trajectory t = sample_trajectory(spec, 40, 1234);
  const DetectionResult a = run_detector(spec, policy, t.observations, 40, true);
  const DetectionResult b = run_detector(spec, policy, t.observations, 40, true);
  CHECK(a.tau == b.tau);
  CHECK(a.sigma == b.sigma);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].action == b.trace[i].action);
    CHECK(a.trace[i].statistic2 == b.trace[i].statistic2);
  }
}

TEST_CASE("compound constraint holds on every run") {
  const ModelSpec spec = random_model(71, 2, 2);
  const StoppingPolicy policy = solve_policy(spec);
  for (std::uint64_t seed = 100; seed < 300; ++seed) {
    const Trajectory t = sample_trajectory(spec, 25, seed);
    const DetectionResult res = run_detector(spec, policy, t.observations, 25);
    if (res.sigma != kNeverStopped) {
      REQUIRE(res.tau != kNeverStopped);
      REQUIRE(res.tau <= res.sigma);
    }
  }
}

TEST_CASE("tiny-model regression snapshot: seed 42, horizon 50") {
  const ModelSpec spec = tiny_model();
  const StoppingPolicy policy = solve_policy(spec);
  const Trajectory t = sample_trajectory(spec, 50, 42);
  REQUIRE(t.theta1 == 7);
  REQUIRE(t.theta2 == 8);
  DetectionResult res = run_detector(spec, policy, t.observations, 50);
  CHECK(res.tau == 7);
  CHECK(res.sigma == 8);
  score_detection(res, t.theta1, t.theta2);
  CHECK(res.hit1);
  CHECK(res.hit2);
}

TEST_CASE("observations must start at the initial state") {
  const ModelSpec spec = tiny_model();
  const StoppingPolicy policy = solve_policy(spec);
  const std::vector<int> bad = {1, 0, 1};
  CHECK_THROWS_AS(run_detector(spec, policy, bad, 3), std::domain_error);
}

TEST_CASE("tabulated detector prices identically to direct path summation") {
  for (const ModelSpec& spec : {tiny_model(), random_model(72, 2, 2)}) {
    const StoppingPolicy policy = solve_policy(spec);
    const int horizon = 5;
    const OraclePolicyTable table = tabulate_detector(spec, policy, horizon);
    const double via_table = evaluate_policy_exact(spec, table, horizon);
    const double direct = exact_detector_value(spec, policy, horizon);
    CHECK(via_table == Catch::Approx(direct).margin(1e-10));
  }
}

TEST_CASE("detector value never exceeds the oracle optimum") {
  for (const ModelSpec& spec : {tiny_model(), random_tiny_class_model(5)}) {
    const StoppingPolicy policy = solve_policy(spec);
    const OraclePolicyTable oracle = brute_force_policy(spec, 5);
    CHECK(exact_detector_value(spec, policy, 5) <= oracle.optimal_value + 1e-12);
  }
}

TEST_CASE("decision trace flips phase after the first stop") {
  const ModelSpec spec = tiny_model();
  const StoppingPolicy policy = solve_policy(spec);
  const Trajectory t = sample_trajectory(spec, 50, 42);
  const DetectionResult res = run_detector(spec, policy, t.observations, 50, true);
  REQUIRE(!res.trace.empty());
  bool seen_first = false;
  for (const DecisionTraceRow& row : res.trace) {
    if (row.action == "stop_first") {
      seen_first = true;
      continue;
    }
    if (seen_first) CHECK(row.second_phase);
  }
  CHECK(seen_first);
}
