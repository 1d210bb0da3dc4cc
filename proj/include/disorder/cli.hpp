#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "disorder/detect.hpp"
#include "disorder/evaluate.hpp"
#include "disorder/io.hpp"
#include "disorder/model.hpp"
#include "disorder/oracle.hpp"
#include "disorder/simulate.hpp"
#include "disorder/solver.hpp"
#include "disorder/verify.hpp"

namespace disorder {

// Exit codes: 0 success, 1 validation/convergence failure, 2 IO/parse failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIo = 2;

namespace cli {

struct SimulateOpts {
  std::string model, out;
  int horizon = 50;
  std::int64_t count = 1;
  std::uint64_t seed = 0;
};

inline void cmd_simulate(const SimulateOpts& o) {
  const ModelSpec spec = read_model_file(o.model);
  std::vector<Trajectory> trajs;
  trajs.reserve(o.count);
  for (std::int64_t i = 0; i < o.count; ++i)
    trajs.push_back(sample_trajectory(spec, o.horizon, o.seed + static_cast<std::uint64_t>(i)));
  std::ostringstream ss;
  write_trajectories_csv(ss, trajs);
  write_text_file(o.out, ss.str());
  std::cout << "wrote " << trajs.size() << " trajectories to " << o.out << "\n";
}

struct SolveOpts {
  std::string model, out;
  int grid = 21;
  double tol = 1e-9;
};

inline void cmd_solve(const SolveOpts& o) {
  const ModelSpec spec = read_model_file(o.model);
  const StoppingPolicy policy = solve_policy(spec, GridConfig{o.grid}, o.tol);
  json j = policy_to_json(policy);
  j["model_digest"] = model_digest(spec);
  write_text_file(o.out, j.dump(2) + "\n");
  std::cout << "solved in " << policy.second_stop_log.size() << "+"
            << policy.first_stop_log.size() << " sweeps, policy written to " << o.out << "\n";
}

struct DetectOpts {
  std::string model, policy, trajectories, out;
  std::int64_t horizon = -1;  // -1: full trajectory length
  std::string trace;          // optional decision-trace csv
  std::string filter_trace;   // optional belief-trace csv
};

inline void cmd_detect(const DetectOpts& o) {
  const ModelSpec spec = read_model_file(o.model);
  const StoppingPolicy policy = read_policy_file(o.policy);
  std::ifstream in(o.trajectories, std::ios::binary);
  if (!in) throw io_error("cannot open " + o.trajectories);
  const std::vector<Trajectory> trajs = parse_trajectories_csv(in);

  std::ostringstream out;
  out << "seed,tau,sigma,theta1,theta2,hit1,hit2\n";
  std::ostringstream trace_out, filter_out;
  const bool want_trace = !o.trace.empty();
  if (want_trace) trace_out << "seed,n,phase,statistic_1,in_B_star,statistic_2,threshold_2,action\n";
  if (!o.filter_trace.empty()) write_filter_trace_header(filter_out);

  auto put = [](std::ostream& os, std::int64_t v) {
    if (v == kNeverStopped)
      os << "never";
    else
      os << v;
  };
  for (const Trajectory& t : trajs) {
    const std::int64_t horizon =
        o.horizon >= 0 ? o.horizon : static_cast<std::int64_t>(t.observations.size()) - 1;
    DetectionResult res = run_detector(spec, policy, t.observations, horizon, want_trace);
    score_detection(res, t.theta1, t.theta2);
    out << t.seed << ',';
    put(out, res.tau);
    out << ',';
    put(out, res.sigma);
    out << ',' << t.theta1 << ',' << t.theta2 << ',' << (res.hit1 ? 1 : 0) << ','
        << (res.hit2 ? 1 : 0) << '\n';
    if (want_trace) {
      char buf[96];
      for (const DecisionTraceRow& row : res.trace) {
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g", row.statistic1,
                      row.in_b_star ? 1 : 0, row.statistic2, row.threshold2);
        trace_out << t.seed << ',' << row.n << ',' << (row.second_phase ? 2 : 1) << ',' << buf
                  << ',' << row.action << '\n';
      }
    }
    if (!o.filter_trace.empty()) {
      FilterState st = init_filter(spec);
      append_filter_trace_row(filter_out, st);
      const std::int64_t last = std::min<std::int64_t>(
          static_cast<std::int64_t>(t.observations.size()) - 1, horizon);
      for (std::int64_t n = 1; n <= last; ++n) {
        st = step_filter(spec, st, t.observations[static_cast<std::size_t>(n)]);
        append_filter_trace_row(filter_out, st);
      }
    }
  }
  write_text_file(o.out, out.str());
  if (want_trace) write_text_file(o.trace, trace_out.str());
  if (!o.filter_trace.empty()) write_text_file(o.filter_trace, filter_out.str());
  std::cout << "wrote " << trajs.size() << " detections to " << o.out << "\n";
}

struct EvaluateOpts {
  std::string model, policy, out;
  std::int64_t runs = 0;
  std::uint64_t seed = 0;
  std::int64_t horizon = -1;  // -1: ten prior means of theta2
  int depth = 0;              // >0: add exact oracle and policy values
};

inline void cmd_evaluate(const EvaluateOpts& o) {
  const ModelSpec spec = read_model_file(o.model);
  const StoppingPolicy policy = read_policy_file(o.policy);
  const std::int64_t horizon = o.horizon >= 0 ? o.horizon : default_detection_horizon(spec);
  EvaluationReport rep = evaluate_policy_mc(spec, policy, o.runs, o.seed, horizon);
  if (o.depth > 0) {
    rep.has_exact = true;
    rep.oracle_value = brute_force_policy(spec, o.depth).optimal_value;
    rep.policy_value_exact = exact_detector_value(spec, policy, o.depth);
  }
  std::ostringstream cfg;
  cfg << model_to_json(spec).dump() << '|' << policy_to_json(policy).dump() << '|' << o.runs
      << '|' << o.seed << '|' << horizon << '|' << o.depth;
  rep.config_digest = hex_digest(cfg.str());
  write_text_file(o.out, report_to_json(rep).dump(2) + "\n");
  std::cout << "estimate " << rep.detection_prob_estimate << " [" << rep.wilson.lo << ", "
            << rep.wilson.hi << "] over " << rep.n_runs << " runs, report written to " << o.out
            << "\n";
}

struct VerifyOpts {
  std::string model, out;
  int depth = 5;
};

inline void cmd_verify(const VerifyOpts& o) {
  const ModelSpec spec = read_model_file(o.model);
  const VerifyReport rep = verify_model(spec, o.depth);
  for (const CheckResult& c : rep.checks) {
    std::printf("%-36s cases=%-8ld max_error=%.3e tol=%.0e %s\n", c.name.c_str(), c.cases,
                c.max_error, c.tolerance, c.pass() ? "PASS" : "FAIL");
  }
  if (!o.out.empty()) {
    json j = verify_report_to_json(rep, model_digest(spec));
    if (o.depth <= kPolicyMaxHorizon) j["oracle"] = oracle_report_to_json(spec, o.depth);
    write_text_file(o.out, j.dump(2) + "\n");
  }
  if (!rep.all_pass()) throw model_error("verification failed");
  std::cout << "all checks passed to depth " << o.depth << "\n";
}

}  // namespace cli

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Bayesian detection of two ordered change points in a Markov sequence"};
  app.require_subcommand(1);

  cli::SimulateOpts sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "sample trajectories to CSV");
  c_sim->add_option("--model", sim.model, "model JSON file")->required();
  c_sim->add_option("--horizon", sim.horizon, "trajectory length")->required();
  c_sim->add_option("--count", sim.count, "number of trajectories")->required();
  c_sim->add_option("--seed", sim.seed, "base seed; run i uses seed+i");
  c_sim->add_option("--out", sim.out, "output CSV")->required();

  cli::SolveOpts sol;
  CLI::App* c_sol = app.add_subcommand("solve", "solve the double-stopping policy");
  c_sol->add_option("--model", sol.model)->required();
  c_sol->add_option("--grid", sol.grid, "direction-grid resolution (regime_count > 1)");
  c_sol->add_option("--tol", sol.tol, "sup-norm convergence tolerance");
  c_sol->add_option("--out", sol.out, "output policy JSON")->required();

  cli::DetectOpts det;
  CLI::App* c_det = app.add_subcommand("detect", "run the detector over trajectories");
  c_det->add_option("--model", det.model)->required();
  c_det->add_option("--policy", det.policy)->required();
  c_det->add_option("--trajectories", det.trajectories, "trajectory CSV from simulate")->required();
  c_det->add_option("--horizon", det.horizon, "truncation horizon (default: full trajectory)");
  c_det->add_option("--trace", det.trace, "optional decision-trace CSV");
  c_det->add_option("--filter-trace", det.filter_trace, "optional belief-trace CSV");
  c_det->add_option("--out", det.out, "output detection CSV")->required();

  cli::EvaluateOpts ev;
  CLI::App* c_ev = app.add_subcommand("evaluate", "Monte Carlo detection probability");
  c_ev->add_option("--model", ev.model)->required();
  c_ev->add_option("--policy", ev.policy)->required();
  c_ev->add_option("--runs", ev.runs, "number of Monte Carlo runs (>= 100)")->required();
  c_ev->add_option("--seed", ev.seed);
  c_ev->add_option("--horizon", ev.horizon, "detection horizon (default: 10 prior means)");
  c_ev->add_option("--depth", ev.depth, "also compute exact values at this horizon");
  c_ev->add_option("--out", ev.out, "output report JSON")->required();

  cli::VerifyOpts ver;
  CLI::App* c_ver = app.add_subcommand("verify", "exhaustive filter/oracle verification");
  c_ver->add_option("--model", ver.model)->required();
  c_ver->add_option("--depth", ver.depth, "exhaustive path depth");
  c_ver->add_option("--out", ver.out, "optional report JSON");

  try {
    app.parse(argc, argv);
    if (c_sim->parsed()) cli::cmd_simulate(sim);
    if (c_sol->parsed()) cli::cmd_solve(sol);
    if (c_det->parsed()) cli::cmd_detect(det);
    if (c_ev->parsed()) cli::cmd_evaluate(ev);
    if (c_ver->parsed()) cli::cmd_verify(ver);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const model_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const guard_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const zero_likelihood_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace disorder
