#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "smd/problems.hpp"
#include "smd/solver.hpp"
#include "smd/verify.hpp"

using namespace smd;

namespace {

// f(x) = |x_1 - target| on the unit 2-ball with one constraint
// g(x) = x_1 + beta <= 0.
ProblemInstance tiny_abs(double target, double beta, Eigen::Index n = 2) {
  ProblemInstance inst;
  inst.objective_kind = ObjectiveKind::abs_linear;
  inst.coeffs = Matrix::Zero(1, n);
  inst.coeffs(0, 0) = 1.0;
  inst.offsets = Vector::Constant(1, target);
  inst.alpha = Matrix::Zero(1, n);
  inst.alpha(0, 0) = 1.0;
  inst.beta = Vector::Constant(1, beta);
  inst.setup_kind = ProxKind::euclidean_ball;
  inst.dimension = n;
  inst.radius = 1.0;
  inst.theta0 = std::sqrt(2.0);
  inst.metadata = {"tiny-abs", "custom", "none", 0, 1, n, 1, ""};
  return inst;
}

const CheckResult& find_check(const VerificationReport& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.name == name) return c;
  FAIL("check '" << name << "' missing from report");
  static CheckResult dummy;
  return dummy;
}

} // namespace

TEST_CASE("grid search finds the unconstrained minimum of a norm objective") {
  // f(x) = ||x - 0|| with a slack constraint: minimum 0 at the origin
  ProblemInstance inst;
  inst.objective_kind = ObjectiveKind::sum_of_norms;
  inst.coeffs = Matrix::Zero(1, 2);
  inst.alpha = Matrix::Zero(1, 2);
  inst.alpha(0, 0) = 1.0;
  inst.beta = Vector::Constant(1, -1.0);
  inst.setup_kind = ProxKind::euclidean_ball;
  inst.dimension = 2;
  inst.radius = 1.0;
  inst.theta0 = std::sqrt(2.0);
  inst.metadata = {"norm-origin", "custom", "none", 0, 1, 2, 1, ""};

  const GridReference ref = grid_search_reference(inst, 100); // even: grid hits 0 exactly
  CHECK(ref.f_star == 0.0);
  CHECK(ref.x_star.norm() == 0.0);
  CHECK_THAT(ref.accuracy, Catch::Matchers::WithinRel(1.0 * 0.02, 1e-12));
  CHECK(ref.resolution == 100);
}

TEST_CASE("grid references are consistent across resolutions") {
  const auto inst = make_example1(2, 2, 1, Distribution::uniform, 3);
  const GridReference coarse = grid_search_reference(inst, 40);
  const GridReference fine = grid_search_reference(inst, 80);
  CHECK(fine.f_star <= coarse.f_star + 1e-15);
  CHECK(coarse.f_star - fine.f_star <= coarse.accuracy);
  CHECK(fine.accuracy < coarse.accuracy);
}

TEST_CASE("grid search rejects impossible inputs") {
  const auto infeasible = tiny_abs(0.0, 10.0); // x_1 + 10 <= 0 never holds on the ball
  CHECK_THROWS_AS(grid_search_reference(infeasible, 50), EmptyFeasibleGridError);

  const auto big = tiny_abs(0.0, -1.0, 4);
  CHECK_THROWS_AS(grid_search_reference(big, 50), std::invalid_argument);

  const auto ok = tiny_abs(0.0, -1.0);
  CHECK_THROWS_AS(grid_search_reference(ok, 1), std::invalid_argument);
}

TEST_CASE("grid search walks the simplex") {
  const auto inst = make_simplex(3, 2, Distribution::uniform, 5);
  const GridReference ref = grid_search_reference(inst, 60);
  REQUIRE(ref.x_star.size() == 3);
  CHECK_THAT(ref.x_star.sum(), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK(ref.x_star.minCoeff() >= 0.0);

  auto prob = compile(inst);
  CHECK(prob.constraints->max_value(ref.x_star) <= 0.0);
  const Vector bary = Vector::Constant(3, 1.0 / 3.0);
  CHECK(ref.f_star <= prob.objective->value(bary) + 1e-15);
}

TEST_CASE("audit passes an honest deterministic run") {
  const auto inst = tiny_abs(0.25, -0.5);
  auto prob = compile(inst);
  SolverConfig cfg;
  cfg.epsilon = 0.1;
  cfg.oracle_mode = OracleMode::exact;
  cfg.record_iterates = true;
  const Solution sol = solve(prob.setup, *prob.objective, *prob.constraints, cfg);

  const GridReference ref = grid_search_reference(inst, 200);
  CHECK(ref.f_star == 0.0); // |x_1 - 0.25| vanishes on the grid line x_1 = 0.25

  const VerificationReport rep = audit_solution(sol, inst, &ref);
  INFO(rep.to_text());
  CHECK(rep.all_pass());
  CHECK(find_check(rep, "feasibility-certificate").pass);
  CHECK(find_check(rep, "iteration-bound").pass);
  CHECK(find_check(rep, "stopping-arithmetic").pass);
  CHECK(find_check(rep, "stopping-trace-consistency").pass);
  CHECK(find_check(rep, "declared-bound-respected").pass);
  const auto& gap = find_check(rep, "optimality-gap");
  CHECK(gap.pass);
  CHECK(gap.threshold == 0.1 + ref.accuracy);

  // audits are pure: same inputs, same report
  const VerificationReport again = audit_solution(sol, inst, &ref);
  CHECK(again.to_text() == rep.to_text());
}

TEST_CASE("audit records but does not judge a single stochastic gap") {
  const auto inst = tiny_abs(0.25, -0.5);
  auto prob = compile(inst);
  SolverConfig cfg;
  cfg.epsilon = 0.1;
  cfg.seed = 8;
  const Solution sol = solve(prob.setup, *prob.objective, *prob.constraints, cfg);
  const GridReference ref = grid_search_reference(inst, 200);
  const VerificationReport rep = audit_solution(sol, inst, &ref);
  const auto& rec = find_check(rep, "optimality-gap-recorded");
  CHECK(rec.pass);
  CHECK_FALSE(rec.note.empty());
}

TEST_CASE("audit flags doctored bookkeeping") {
  const auto inst = tiny_abs(0.25, -0.5);
  auto prob = compile(inst);
  SolverConfig cfg;
  cfg.epsilon = 0.1;
  const Solution honest = solve(prob.setup, *prob.objective, *prob.constraints, cfg);

  Solution doctored = honest;
  doctored.iterations = doctored.theoretical_bound_steps + 5;
  doctored.trace.clear(); // hide the evidence; the audit must still notice
  const VerificationReport rep = audit_solution(doctored, inst);
  const auto& bound = find_check(rep, "iteration-bound");
  CHECK_FALSE(bound.pass);
  CHECK(bound.measured == static_cast<double>(doctored.iterations));
  CHECK(bound.threshold == static_cast<double>(doctored.theoretical_bound_steps));
  CHECK_FALSE(rep.all_pass());

  Solution misreported = honest;
  misreported.theoretical_bound_steps += 1;
  const auto& c = find_check(audit_solution(misreported, inst), "iteration-bound");
  CHECK_FALSE(c.pass);
  CHECK(c.note.find("differs") != std::string::npos);

  Solution wrong_dim = honest;
  wrong_dim.x_bar = Vector::Zero(5);
  CHECK_THROWS_AS(audit_solution(wrong_dim, inst), std::invalid_argument);
}

TEST_CASE("audit accepts a cap stop when the certificate still holds") {
  const auto inst = tiny_abs(0.0, -10.0);
  auto prob = compile(inst);
  SolverConfig cfg;
  cfg.epsilon = 0.5;
  cfg.start = Vector(2);
  cfg.start << 1.0, 0.0;
  cfg.max_iterations = 5;
  const Solution sol = solve(prob.setup, *prob.objective, *prob.constraints, cfg);
  REQUIRE(sol.stopped_by == StopReason::cap);

  const VerificationReport rep = audit_solution(sol, inst);
  INFO(rep.to_text());
  CHECK(rep.all_pass());
  CHECK(find_check(rep, "feasibility-certificate").note.find("cap") != std::string::npos);
}

TEST_CASE("lemma-1 audit passes the 32-step deterministic run") {
  const auto inst = tiny_abs(0.0, -10.0);
  auto prob = compile(inst);
  SolverConfig cfg;
  cfg.epsilon = 0.5;
  cfg.start = Vector(2);
  cfg.start << 1.0, 0.0;
  cfg.oracle_mode = OracleMode::exact;
  cfg.record_iterates = true;
  const Solution sol = solve(prob.setup, *prob.objective, *prob.constraints, cfg);
  REQUIRE(sol.iterations == 32);

  const GridReference ref = grid_search_reference(inst, 100);
  const VerificationReport rep = audit_lemma1(sol, inst, ref.x_star);
  INFO(rep.to_text());
  CHECK(rep.all_pass());
  REQUIRE(rep.checks.size() == 1);
  CHECK(rep.checks[0].name == "step-inequality-all");
  CHECK(rep.checks[0].note.find("32/32") != std::string::npos);

  // negative control: corrupt one recorded iterate
  Solution bent = sol;
  bent.trace[10].iterate[0] += 0.1;
  const VerificationReport flagged = audit_lemma1(bent, inst, ref.x_star);
  CHECK_FALSE(flagged.all_pass());

  // insufficient data must be an error, not a silent pass
  Solution thinned = sol;
  thinned.trace.resize(16);
  CHECK_THROWS_AS(audit_lemma1(thinned, inst, ref.x_star), std::invalid_argument);

  Solution no_iterates = sol;
  for (auto& r : no_iterates.trace) r.iterate = Vector();
  CHECK_THROWS_AS(audit_lemma1(no_iterates, inst, ref.x_star), std::invalid_argument);

  Vector outside = Vector::Zero(2);
  outside[0] = 2.0;
  CHECK_THROWS_AS(audit_lemma1(sol, inst, outside), std::invalid_argument);
}

TEST_CASE("lemma-1 audit rejects stochastic traces") {
  const auto inst = tiny_abs(0.25, -0.5);
  auto prob = compile(inst);
  SolverConfig cfg;
  cfg.epsilon = 0.1;
  cfg.record_iterates = true;
  const Solution sol = solve(prob.setup, *prob.objective, *prob.constraints, cfg);
  const GridReference ref = grid_search_reference(inst, 100);
  CHECK_THROWS_AS(audit_lemma1(sol, inst, ref.x_star), std::invalid_argument);
}

TEST_CASE("lemma-1 audit handles zero-subgradient steps") {
  const auto inst = tiny_abs(0.0, -10.0);
  auto prob = compile(inst);
  SolverConfig cfg;
  cfg.epsilon = 0.5;
  cfg.start = Vector(2);
  cfg.start << 0.0, 0.3; // exact subgradient of |x_1| vanishes here
  cfg.oracle_mode = OracleMode::exact;
  cfg.record_iterates = true;
  const Solution sol = solve(prob.setup, *prob.objective, *prob.constraints, cfg);
  REQUIRE(sol.iterations == 1);
  REQUIRE(sol.trace[0].m == 0.0);

  const GridReference ref = grid_search_reference(inst, 100);
  const VerificationReport rep = audit_lemma1(sol, inst, ref.x_star);
  CHECK(rep.all_pass());
}

TEST_CASE("lemma-1 audit covers the entropy setup") {
  const auto inst = make_simplex(3, 2, Distribution::uniform, 5);
  auto prob = compile(inst);
  SolverConfig cfg;
  cfg.epsilon = 0.3;
  cfg.oracle_mode = OracleMode::exact;
  cfg.record_iterates = true;
  const Solution sol = solve(prob.setup, *prob.objective, *prob.constraints, cfg);
  REQUIRE(sol.trace_stride == 1);

  const GridReference ref = grid_search_reference(inst, 90);
  const VerificationReport rep = audit_lemma1(sol, inst, ref.x_star);
  INFO(rep.to_text());
  CHECK(rep.all_pass());

  const VerificationReport audit = audit_solution(sol, inst, &ref);
  INFO(audit.to_text());
  CHECK(audit.all_pass());
}

TEST_CASE("expectation audit stays inside the epsilon band on a tiny instance") {
  const auto inst = tiny_abs(0.25, -0.5);
  SolverConfig cfg;
  cfg.epsilon = 0.15;
  cfg.seed = 100;
  const GridReference ref = grid_search_reference(inst, 200);
  const ExpectationAudit audit = expectation_audit(inst, cfg, 10, ref);
  CHECK(audit.seeds == 10);
  CHECK(audit.gaps.size() == 10);
  CHECK(audit.mean_gap <= audit.epsilon + audit.slack + 2.0 * audit.std_error);
  CHECK(audit.status <= 1);

  CHECK_THROWS_AS(expectation_audit(inst, cfg, 1, ref), std::invalid_argument);
}
