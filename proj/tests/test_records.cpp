#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "smd/problems.hpp"
#include "smd/records.hpp"
#include "smd/solver.hpp"

using namespace smd;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

Solution small_run(std::uint64_t seed, bool record_values) {
  auto inst = make_example1(15, 6, 3, Distribution::uniform, 11);
  auto prob = compile(inst);
  SolverConfig cfg;
  cfg.epsilon = 0.3;
  cfg.seed = seed;
  cfg.record_iterates = true;
  cfg.record_step_values = record_values;
  return solve(prob.setup, *prob.objective, *prob.constraints, cfg);
}

} // namespace

TEST_CASE("csv header column order is frozen") {
  CHECK(csv_header() ==
        "instance,algorithm,epsilon,seed,iterations,productive_steps,nonproductive_steps,"
        "wall_time_s,objective_at_xbar,constraint_at_xbar,constraint_value_evals,"
        "constraint_subgrad_calls,objective_subgrad_calls,theoretical_bound,stopped_by,"
        "total_time_s");
  CHECK(split_csv(csv_header()).size() == 16);
}

TEST_CASE("csv row is written in the frozen order") {
  Solution sol;
  sol.algorithm = Algorithm::modified;
  sol.epsilon = 0.05;
  sol.seed = 7;
  sol.iterations = 32;
  sol.productive_steps = 30;
  sol.nonproductive_steps = 2;
  sol.wall_time_s = 0.25;
  sol.objective_at_xbar = 1.5;
  sol.constraint_at_xbar = -0.1;
  sol.calls.constraint_values = 64;
  sol.calls.constraint_subgrads = 2;
  sol.calls.objective_subgrad = 30;
  sol.theoretical_bound_steps = 800;
  sol.stopped_by = StopReason::criterion;

  CHECK(csv_row(sol, "tiny-1", 0.5) ==
        "tiny-1,modified,0.05,7,32,30,2,0.25,1.5,-0.1,64,2,30,800,criterion,0.5");
}

TEST_CASE("timing columns are the only run-to-run varying fields") {
  const auto cols = split_csv(csv_header());
  REQUIRE(cols.size() == 16);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const bool timing = cols[i] == "wall_time_s" || cols[i] == "total_time_s";
    CHECK(csv_column_is_timing(i) == timing);
  }

  const Solution a = small_run(5, false);
  const Solution b = small_run(5, false);
  const auto ra = split_csv(csv_row(a, "x", 0.011));
  const auto rb = split_csv(csv_row(b, "x", 0.017));
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i)
    if (!csv_column_is_timing(i)) CHECK(ra[i] == rb[i]);
}

TEST_CASE("doubles are written in shortest round-trip form") {
  CHECK(format_double(0.05) == "0.05");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-0.1) == "-0.1");
  CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
}

TEST_CASE("trace json round-trips a full run") {
  const Solution sol = small_run(3, true);
  const nlohmann::json j = solution_to_json(sol, "rt-1", RecordKind::trace);
  CHECK_FALSE(j.contains("wall_time_s")); // traces carry no timing
  std::string id;
  const Solution back = solution_from_json(j, &id);

  CHECK(id == "rt-1");
  CHECK(back.algorithm == sol.algorithm);
  CHECK(back.oracle_mode == sol.oracle_mode);
  CHECK(back.epsilon == sol.epsilon);
  CHECK(back.theta0 == sol.theta0);
  CHECK(back.seed == sol.seed);
  CHECK(back.iterations == sol.iterations);
  CHECK(back.productive_steps == sol.productive_steps);
  CHECK(back.nonproductive_steps == sol.nonproductive_steps);
  CHECK(back.stopped_by == sol.stopped_by);
  CHECK((back.x_bar - sol.x_bar).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((back.final_iterate - sol.final_iterate).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(back.sum_sq_m_total == sol.sum_sq_m_total);
  CHECK(back.sum_sq_m_prev == sol.sum_sq_m_prev);
  CHECK(back.calls == sol.calls);
  CHECK(back.trace_stride == sol.trace_stride);
  REQUIRE(back.trace.size() == sol.trace.size());
  for (std::size_t k = 0; k < sol.trace.size(); ++k) {
    CHECK(back.trace[k].index == sol.trace[k].index);
    CHECK(back.trace[k].productive == sol.trace[k].productive);
    CHECK(back.trace[k].violated_index == sol.trace[k].violated_index);
    CHECK(back.trace[k].constraint_value == sol.trace[k].constraint_value);
    CHECK(back.trace[k].m == sol.trace[k].m);
    CHECK(back.trace[k].h == sol.trace[k].h);
    CHECK(back.trace[k].objective_value == sol.trace[k].objective_value);
    CHECK(back.trace[k].calls == sol.trace[k].calls);
    REQUIRE((back.trace[k].iterate - sol.trace[k].iterate).lpNorm<Eigen::Infinity>() == 0.0);
  }

  // equal-seed runs serialize to the identical trace document
  const Solution again = small_run(3, true);
  CHECK(solution_to_json(again, "rt-1", RecordKind::trace).dump(1) == j.dump(1));
}

TEST_CASE("summary json carries timing but no steps") {
  const Solution sol = small_run(4, false);
  const nlohmann::json j = solution_to_json(sol, "sum-1", RecordKind::summary);
  CHECK(j.contains("wall_time_s"));
  CHECK_FALSE(j.contains("steps"));
  const Solution back = solution_from_json(j);
  CHECK(back.wall_time_s == sol.wall_time_s);
  CHECK(back.trace.empty());
}

TEST_CASE("nan step size survives the json round-trip as null") {
  // a run whose first drawn subgradient is zero records h = NaN
  Matrix a(1, 2);
  a << 1.0, 0.0;
  Vector b(1);
  b << 0.0;
  auto f = abs_linear_objective(a, b);
  Matrix alpha(1, 2);
  alpha << 1.0, 0.0;
  Vector beta(1);
  beta << -10.0;
  auto g = linear_max_constraints(alpha, beta);
  auto setup = ProxSetup::euclidean_ball(2, 1.0);
  SolverConfig cfg;
  cfg.epsilon = 0.5;
  cfg.start = Vector(2);
  cfg.start << 0.0, 0.3;
  const Solution sol = run_standard(setup, *f, *g, cfg);
  REQUIRE(sol.trace.size() == 1);
  REQUIRE(std::isnan(sol.trace[0].h));

  const nlohmann::json j = solution_to_json(sol, "nan-h", RecordKind::trace);
  CHECK(j["steps"][0]["h"].is_null());
  const Solution back = solution_from_json(j);
  CHECK(std::isnan(back.trace[0].h));
}

TEST_CASE("solution files save and load") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path =
      (dir / ("rec-" + std::to_string(::getpid()) + ".json")).string();
  const Solution sol = small_run(6, false);
  save_solution(sol, "file-1", path, RecordKind::trace);
  std::string id;
  const Solution back = load_solution(path, &id);
  CHECK(id == "file-1");
  CHECK(back.iterations == sol.iterations);
  CHECK(back.trace.size() == sol.trace.size());
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_solution(path), std::runtime_error);
}

TEST_CASE("loader rejects foreign json") {
  nlohmann::json j;
  j["format"] = "something-else";
  CHECK_THROWS_AS(solution_from_json(j), std::runtime_error);
}
