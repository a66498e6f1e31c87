#pragma once

// Result records: one frozen CSV row per run, and JSON documents for solution
// summaries and full step traces.
//
// Column order is a contract; downstream scripts parse by header name but the
// order below never changes:
//
//   instance,algorithm,epsilon,seed,iterations,productive_steps,
//   nonproductive_steps,wall_time_s,objective_at_xbar,constraint_at_xbar,
//   constraint_value_evals,constraint_subgrad_calls,objective_subgrad_calls,
//   theoretical_bound,stopped_by,total_time_s
//
// wall_time_s is solver-loop time only; total_time_s includes instance load
// and oracle construction.  Every float is written in shortest round-trip
// form, so equal runs produce byte-equal rows apart from the two time fields.
// Trace JSON deliberately contains no timing, which makes trace files of
// equal-seed runs byte-identical.

#include <charconv>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "smd/solver.hpp"

namespace smd {

inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_header() {
  return "instance,algorithm,epsilon,seed,iterations,productive_steps,nonproductive_steps,"
         "wall_time_s,objective_at_xbar,constraint_at_xbar,constraint_value_evals,"
         "constraint_subgrad_calls,objective_subgrad_calls,theoretical_bound,stopped_by,"
         "total_time_s";
}

inline std::string csv_row(const Solution& sol, const std::string& instance_id,
                           double total_time_s) {
  std::string row;
  row += instance_id;
  row += ',';
  row += to_string(sol.algorithm);
  row += ',';
  row += format_double(sol.epsilon);
  row += ',';
  row += std::to_string(sol.seed);
  row += ',';
  row += std::to_string(sol.iterations);
  row += ',';
  row += std::to_string(sol.productive_steps);
  row += ',';
  row += std::to_string(sol.nonproductive_steps);
  row += ',';
  row += format_double(sol.wall_time_s);
  row += ',';
  row += format_double(sol.objective_at_xbar);
  row += ',';
  row += format_double(sol.constraint_at_xbar);
  row += ',';
  row += std::to_string(sol.calls.constraint_values);
  row += ',';
  row += std::to_string(sol.calls.constraint_subgrads);
  row += ',';
  row += std::to_string(sol.calls.objective_subgrad);
  row += ',';
  row += std::to_string(sol.theoretical_bound_steps);
  row += ',';
  row += to_string(sol.stopped_by);
  row += ',';
  row += format_double(total_time_s);
  return row;
}

// Indices of the two columns excluded from determinism comparisons.
inline bool csv_column_is_timing(std::size_t index) { return index == 7 || index == 15; }

namespace detail {

// NaN cannot be represented in JSON.  Store it as null up front so the
// in-memory document matches what dump() would emit.
inline nlohmann::json double_to_json(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(double_to_json(v[i]));
  return a;
}

inline Vector vector_from_json(const nlohmann::json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = a[i].is_null()
                                          ? std::numeric_limits<double>::quiet_NaN()
                                          : a[i].get<double>();
  return v;
}

inline double json_to_double(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

} // namespace detail

enum class RecordKind {
  summary, // config + outcome + wall time, no per-step data
  trace    // config + outcome + per-step data, no wall time
};

inline nlohmann::json solution_to_json(const Solution& sol, const std::string& instance_id,
                                       RecordKind kind) {
  nlohmann::json j;
  j["format"] = "smd-solution-1";
  j["instance"] = instance_id;
  j["algorithm"] = to_string(sol.algorithm);
  j["oracle_mode"] = to_string(sol.oracle_mode);
  j["epsilon"] = sol.epsilon;
  j["theta0"] = sol.theta0;
  j["seed"] = sol.seed;
  j["start"] = detail::vector_to_json(sol.start);
  j["iterations"] = sol.iterations;
  j["productive_steps"] = sol.productive_steps;
  j["nonproductive_steps"] = sol.nonproductive_steps;
  j["stopped_by"] = to_string(sol.stopped_by);
  j["x_bar"] = detail::vector_to_json(sol.x_bar);
  j["final_iterate"] = detail::vector_to_json(sol.final_iterate);
  j["objective_at_xbar"] = sol.objective_at_xbar;
  j["constraint_at_xbar"] = sol.constraint_at_xbar;
  j["sum_sq_m_total"] = sol.sum_sq_m_total;
  j["sum_sq_m_prev"] = sol.sum_sq_m_prev;
  j["declared_mf"] = sol.declared_mf;
  j["declared_mg"] = sol.declared_mg;
  j["max_observed_mf"] = sol.max_observed_mf;
  j["max_observed_mg"] = sol.max_observed_mg;
  j["theoretical_bound"] = sol.theoretical_bound_steps;
  j["calls"] = {{"objective_subgrad", sol.calls.objective_subgrad},
                {"constraint_values", sol.calls.constraint_values},
                {"constraint_subgrads", sol.calls.constraint_subgrads}};
  if (kind == RecordKind::summary) {
    j["wall_time_s"] = sol.wall_time_s;
  } else {
    j["trace_stride"] = sol.trace_stride;
    nlohmann::json steps = nlohmann::json::array();
    for (const StepRecord& r : sol.trace) {
      nlohmann::json s;
      s["k"] = r.index;
      s["productive"] = r.productive;
      s["j"] = r.violated_index;
      s["g"] = detail::double_to_json(r.constraint_value);
      s["m"] = r.m;
      s["h"] = detail::double_to_json(r.h);
      if (!std::isnan(r.objective_value)) s["f"] = r.objective_value;
      s["calls"] = {r.calls.objective_subgrad, r.calls.constraint_values,
                    r.calls.constraint_subgrads};
      if (r.iterate.size() > 0) s["x"] = detail::vector_to_json(r.iterate);
      steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
  }
  return j;
}

inline Solution solution_from_json(const nlohmann::json& j, std::string* instance_id = nullptr) {
  if (!j.contains("format") || j["format"] != "smd-solution-1")
    throw std::runtime_error("not an smd-solution-1 record");
  Solution sol;
  if (instance_id) *instance_id = j["instance"].get<std::string>();
  sol.algorithm = j["algorithm"] == "modified" ? Algorithm::modified : Algorithm::standard;
  sol.oracle_mode = j["oracle_mode"] == "exact" ? OracleMode::exact : OracleMode::stochastic;
  sol.epsilon = j["epsilon"].get<double>();
  sol.theta0 = j["theta0"].get<double>();
  sol.seed = j["seed"].get<std::uint64_t>();
  sol.start = detail::vector_from_json(j["start"]);
  sol.iterations = j["iterations"].get<std::uint64_t>();
  sol.productive_steps = j["productive_steps"].get<std::uint64_t>();
  sol.nonproductive_steps = j["nonproductive_steps"].get<std::uint64_t>();
  sol.stopped_by = j["stopped_by"] == "cap" ? StopReason::cap : StopReason::criterion;
  sol.x_bar = detail::vector_from_json(j["x_bar"]);
  sol.final_iterate = detail::vector_from_json(j["final_iterate"]);
  sol.objective_at_xbar = j["objective_at_xbar"].get<double>();
  sol.constraint_at_xbar = j["constraint_at_xbar"].get<double>();
  sol.sum_sq_m_total = j["sum_sq_m_total"].get<double>();
  sol.sum_sq_m_prev = j["sum_sq_m_prev"].get<double>();
  sol.declared_mf = j["declared_mf"].get<double>();
  sol.declared_mg = j["declared_mg"].get<double>();
  sol.max_observed_mf = j["max_observed_mf"].get<double>();
  sol.max_observed_mg = j["max_observed_mg"].get<double>();
  sol.theoretical_bound_steps = j["theoretical_bound"].get<std::uint64_t>();
  sol.calls.objective_subgrad = j["calls"]["objective_subgrad"].get<std::uint64_t>();
  sol.calls.constraint_values = j["calls"]["constraint_values"].get<std::uint64_t>();
  sol.calls.constraint_subgrads = j["calls"]["constraint_subgrads"].get<std::uint64_t>();
  if (j.contains("wall_time_s")) sol.wall_time_s = j["wall_time_s"].get<double>();
  if (j.contains("trace_stride")) sol.trace_stride = j["trace_stride"].get<std::uint64_t>();
  if (j.contains("steps")) {
    for (const auto& s : j["steps"]) {
      StepRecord r;
      r.index = s["k"].get<std::uint64_t>();
      r.productive = s["productive"].get<bool>();
      r.violated_index = s["j"].get<int>();
      r.constraint_value = detail::json_to_double(s["g"]);
      r.m = detail::json_to_double(s["m"]);
      r.h = detail::json_to_double(s["h"]);
      if (s.contains("f")) r.objective_value = s["f"].get<double>();
      r.calls.objective_subgrad = s["calls"][0].get<std::uint64_t>();
      r.calls.constraint_values = s["calls"][1].get<std::uint64_t>();
      r.calls.constraint_subgrads = s["calls"][2].get<std::uint64_t>();
      if (s.contains("x")) r.iterate = detail::vector_from_json(s["x"]);
      sol.trace.push_back(std::move(r));
    }
  }
  return sol;
}

inline void save_solution(const Solution& sol, const std::string& instance_id,
                          const std::string& path, RecordKind kind) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << solution_to_json(sol, instance_id, kind).dump(1) << "\n";
  if (!os) throw std::runtime_error("short write to '" + path + "'");
}

inline Solution load_solution(const std::string& path, std::string* instance_id = nullptr) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  is >> j;
  return solution_from_json(j, instance_id);
}

} // namespace smd
