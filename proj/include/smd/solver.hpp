#pragma once

// Adaptive mirror-descent solver for  min f(x)  s.t.  max_j g_j(x) <= 0  over
// a prox-friendly set Q, driven by stochastic subgradient oracles.
//
// Each step first classifies the current iterate: if max_j g_j(x) <= eps the
// step is "productive" (move along an objective subgradient, include x in the
// output average), otherwise it is "non-productive" (move along a subgradient
// of a violated constraint component).  The step size is fully adaptive,
//
//   h_N = theta0 / sqrt( sum_{t<=N} M_t^2 ),   M_t = ||drawn subgradient||_2,
//
// and the run stops once  N >= (2*theta0/eps) * sqrt( sum_{t<N} M_t^2 ).
// With an a.s. bound M on all draws this stopping rule fires within
// ceil(4 M^2 theta0^2 / eps^2) steps and the averaged productive iterate is an
// eps-accurate, eps-feasible solution in expectation.
//
// Two variants share the engine and differ only in how a step is classified:
//   * standard  evaluates every g_j and takes the max (m evaluations/step);
//   * modified  scans g_1, g_2, ... and stops at the first component above
//     eps, charging only as many evaluations as the scan visited.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "smd/oracles.hpp"
#include "smd/prox.hpp"
#include "smd/rng.hpp"

namespace smd {

enum class Algorithm { standard, modified };
enum class OracleMode { stochastic, exact };
enum class StopReason { criterion, cap };

inline const char* to_string(Algorithm a) {
  return a == Algorithm::standard ? "standard" : "modified";
}
inline const char* to_string(OracleMode m) {
  return m == OracleMode::stochastic ? "stochastic" : "exact";
}
inline const char* to_string(StopReason r) {
  return r == StopReason::criterion ? "criterion" : "cap";
}

struct OracleCallCounts {
  std::uint64_t objective_subgrad = 0;
  std::uint64_t constraint_values = 0;
  std::uint64_t constraint_subgrads = 0;

  OracleCallCounts& operator+=(const OracleCallCounts& o) {
    objective_subgrad += o.objective_subgrad;
    constraint_values += o.constraint_values;
    constraint_subgrads += o.constraint_subgrads;
    return *this;
  }
  friend bool operator==(const OracleCallCounts&, const OracleCallCounts&) = default;
};

struct StepRecord {
  std::uint64_t index = 0;
  bool productive = false;
  int violated_index = -1;     // deciding component for non-productive steps
  double constraint_value = 0; // productive: max over components; else g_j at the violation
  double m = 0.0;              // Euclidean norm of the drawn subgradient
  double h = 0.0;              // step size after this draw (NaN while the norm sum is zero)
  double objective_value = std::numeric_limits<double>::quiet_NaN(); // only if requested
  OracleCallCounts calls;      // cost of this step alone
  Vector iterate;              // x^k before the step, only if requested
};

struct SolverConfig {
  double epsilon = 0.05;
  double theta0 = 0.0;          // 0 -> take the setup's value
  Vector start;                 // empty -> setup.default_start()
  std::uint64_t seed = 1;
  std::uint64_t max_iterations = 0; // 0 -> 10x the theoretical bound
  Algorithm algorithm = Algorithm::standard;
  OracleMode oracle_mode = OracleMode::stochastic;
  bool record_step_values = false; // store f(x^k) per step (adds one value() call per step)
  bool record_iterates = false;    // store x^k per step (needed for per-step audits)
  std::size_t trace_capacity = 100000;
};

struct Solution {
  // configuration echo
  Algorithm algorithm = Algorithm::standard;
  OracleMode oracle_mode = OracleMode::stochastic;
  double epsilon = 0.0;
  double theta0 = 0.0;
  std::uint64_t seed = 0;
  Vector start;

  // outcome
  std::uint64_t iterations = 0;
  std::uint64_t productive_steps = 0;
  std::uint64_t nonproductive_steps = 0;
  StopReason stopped_by = StopReason::criterion;
  Vector x_bar;          // average of productive iterates
  Vector final_iterate;  // x^N
  double objective_at_xbar = 0.0;
  double constraint_at_xbar = 0.0;

  // stopping-rule state (exact values the solver used)
  double sum_sq_m_total = 0.0; // sum of M_t^2 over all N steps
  double sum_sq_m_prev = 0.0;  // same sum over the first N-1 steps

  // declared vs observed subgradient bounds
  double declared_mf = 0.0;
  double declared_mg = 0.0;
  double max_observed_mf = 0.0;
  double max_observed_mg = 0.0;

  std::uint64_t theoretical_bound_steps = 0;
  OracleCallCounts calls;
  double wall_time_s = 0.0;

  std::vector<StepRecord> trace;
  std::uint64_t trace_stride = 1; // steps are recorded when index % stride == 0
};

class NoProductiveStepsError : public std::runtime_error {
public:
  explicit NoProductiveStepsError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
// Guard against values that differ from an integer only in the last few bits,
// e.g. 4*(sqrt(2))^2/0.1^2 evaluating to 800.0000000000001: without the snap
// the ceiling would report 801.
inline double snap_to_integer(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(r))) return r;
  return v;
}
} // namespace detail

// ceil( 4 * max(mf, mg)^2 * theta0^2 / eps^2 ): the step count within which
// the stopping rule is guaranteed to fire when all draws respect the bound.
inline std::uint64_t theoretical_bound(double mf, double mg, double theta0, double eps) {
  if (!(mf > 0.0) || !(mg > 0.0))
    throw std::invalid_argument("theoretical_bound: subgradient bounds must be positive");
  if (!(theta0 > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("theoretical_bound: theta0 and eps must be positive");
  const double m = std::max(mf, mg);
  const double raw = 4.0 * m * m * theta0 * theta0 / (eps * eps);
  const double v = std::ceil(detail::snap_to_integer(raw));
  if (!(v < 1.8e19))
    throw std::overflow_error("theoretical_bound: step bound exceeds the 64-bit range");
  return static_cast<std::uint64_t>(v);
}

// Stopping rule  N >= (2*theta0/eps) * sqrt(sum_sq_m), with a one-ulp-scale
// slack so runs whose right-hand side is an integer up to rounding noise stop
// on the intended step.  The auditor uses this same predicate.
inline bool stopping_satisfied(std::uint64_t n, double sum_sq_m, double theta0, double eps) {
  const double rhs = (2.0 * theta0 / eps) * std::sqrt(sum_sq_m);
  return static_cast<double>(n) >= rhs * (1.0 - 1e-9);
}

namespace detail {

inline Solution run_mirror_descent(const ProxSetup& setup, const ObjectiveOracle& f,
                                   const ConstraintOracle& g, const SolverConfig& cfg,
                                   Algorithm alg) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("solver: epsilon must be positive");
  const double theta0 = cfg.theta0 > 0.0 ? cfg.theta0 : setup.theta0();
  if (!(theta0 > 0.0)) throw std::invalid_argument("solver: theta0 must be positive");

  Vector x = cfg.start.size() > 0 ? cfg.start : setup.default_start();
  setup.reproject(x); // throws if the start is infeasible beyond tolerance

  const double mf = f.lipschitz_bound();
  const double mg = g.lipschitz_bound();
  const std::uint64_t bound = theoretical_bound(mf, mg, theta0, cfg.epsilon);
  std::uint64_t cap;
  if (cfg.max_iterations > 0)
    cap = cfg.max_iterations;
  else if (bound > std::numeric_limits<std::uint64_t>::max() / 10)
    cap = std::numeric_limits<std::uint64_t>::max();
  else
    cap = 10 * bound;

  const bool exact = cfg.oracle_mode == OracleMode::exact;
  if (exact && (!f.has_exact_subgrad() || !g.has_exact_subgrad()))
    throw std::invalid_argument("solver: exact oracle mode requested but not available");

  RngStream root(cfg.seed);
  RngStream f_rng = root.split(0);
  RngStream g_rng = root.split(1);

  Solution sol;
  sol.algorithm = alg;
  sol.oracle_mode = cfg.oracle_mode;
  sol.epsilon = cfg.epsilon;
  sol.theta0 = theta0;
  sol.seed = cfg.seed;
  sol.start = x;
  sol.declared_mf = mf;
  sol.declared_mg = mg;
  sol.theoretical_bound_steps = bound;

  Vector grad(setup.dimension());
  Vector x_sum = Vector::Zero(setup.dimension());
  double sum_sq = 0.0;
  std::uint64_t n = 0;
  std::uint64_t stride = 1;
  const std::size_t trace_cap = std::max<std::size_t>(cfg.trace_capacity, 2);
  StopReason reason = StopReason::cap;

  const auto t0 = std::chrono::steady_clock::now();
  for (;;) {
    // classify the step
    bool productive;
    int j_sel = -1;
    double decided;
    OracleCallCounts step_calls;
    if (alg == Algorithm::standard) {
      const MaxComponent mc = g.max_component(x);
      step_calls.constraint_values = static_cast<std::uint64_t>(g.count());
      productive = mc.value <= cfg.epsilon;
      decided = mc.value;
      if (!productive) j_sel = mc.index;
    } else {
      const ConstraintScan scan = g.scan_first_violated(x, cfg.epsilon);
      step_calls.constraint_values = static_cast<std::uint64_t>(scan.evaluated);
      productive = !scan.violation.has_value();
      if (productive) {
        decided = scan.max_seen;
      } else {
        decided = scan.violation->value;
        j_sel = scan.violation->index;
      }
    }

    // draw the subgradient for this step
    if (productive) {
      if (exact)
        f.exact_subgrad(x, grad);
      else
        f.stochastic_subgrad(x, f_rng, grad);
      step_calls.objective_subgrad = 1;
    } else {
      if (exact)
        g.exact_subgrad(j_sel, x, grad);
      else
        g.stochastic_subgrad(j_sel, x, g_rng, grad);
      step_calls.constraint_subgrads = 1;
    }

    const double mk = grad.norm();
    if (!std::isfinite(mk))
      throw std::runtime_error("solver: oracle returned a non-finite subgradient at step " +
                               std::to_string(n));
    if (productive)
      sol.max_observed_mf = std::max(sol.max_observed_mf, mk);
    else
      sol.max_observed_mg = std::max(sol.max_observed_mg, mk);

    sol.sum_sq_m_prev = sum_sq;
    sum_sq += mk * mk;
    const double h =
        sum_sq > 0.0 ? theta0 / std::sqrt(sum_sq) : std::numeric_limits<double>::quiet_NaN();

    if (productive) {
      x_sum += x;
      ++sol.productive_steps;
    } else {
      ++sol.nonproductive_steps;
    }

    if (n % stride == 0) {
      StepRecord rec;
      rec.index = n;
      rec.productive = productive;
      rec.violated_index = j_sel;
      rec.constraint_value = decided;
      rec.m = mk;
      rec.h = h;
      rec.calls = step_calls;
      if (cfg.record_step_values) rec.objective_value = f.value(x);
      if (cfg.record_iterates) rec.iterate = x;
      if (sol.trace.size() == trace_cap) {
        // halve the resolution: keep records aligned to the doubled stride
        std::size_t w = 0;
        for (std::size_t r = 0; r < sol.trace.size(); ++r)
          if (sol.trace[r].index % (stride * 2) == 0) sol.trace[w++] = std::move(sol.trace[r]);
        sol.trace.resize(w);
        stride *= 2;
      }
      if (rec.index % stride == 0) sol.trace.push_back(std::move(rec));
    }

    // mirror step; a zero draw moves nothing and skips the prox machinery
    if (mk > 0.0) {
      grad *= h;
      setup.mirr_in_place(x, grad);
    }

    ++n;
    sol.calls += step_calls;
    if (stopping_satisfied(n, sum_sq, theta0, cfg.epsilon)) {
      reason = StopReason::criterion;
      break;
    }
    if (n >= cap) {
      reason = StopReason::cap;
      break;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();

  sol.iterations = n;
  sol.stopped_by = reason;
  sol.sum_sq_m_total = sum_sq;
  sol.trace_stride = stride;
  sol.final_iterate = x;
  sol.wall_time_s = std::chrono::duration<double>(t1 - t0).count();

  if (sol.productive_steps == 0)
    throw NoProductiveStepsError(
        "no productive steps after " + std::to_string(n) + " iterations (stopped by " +
        to_string(reason) +
        "); every iterate violated the constraint by more than eps, so no averaged "
        "solution exists -- check feasibility of the problem or enlarge eps");

  sol.x_bar = x_sum / static_cast<double>(sol.productive_steps);
  sol.objective_at_xbar = f.value(sol.x_bar);
  sol.constraint_at_xbar = g.max_value(sol.x_bar);
  return sol;
}

} // namespace detail

inline Solution run_standard(const ProxSetup& setup, const ObjectiveOracle& f,
                             const ConstraintOracle& g, const SolverConfig& cfg) {
  return detail::run_mirror_descent(setup, f, g, cfg, Algorithm::standard);
}

inline Solution run_modified(const ProxSetup& setup, const ObjectiveOracle& f,
                             const ConstraintOracle& g, const SolverConfig& cfg) {
  return detail::run_mirror_descent(setup, f, g, cfg, Algorithm::modified);
}

inline Solution solve(const ProxSetup& setup, const ObjectiveOracle& f, const ConstraintOracle& g,
                      const SolverConfig& cfg) {
  return detail::run_mirror_descent(setup, f, g, cfg, cfg.algorithm);
}

} // namespace smd
