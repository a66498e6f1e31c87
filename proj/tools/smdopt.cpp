// smdopt: generate benchmark instances, run the adaptive mirror-descent
// solver, benchmark algorithm variants, and verify solutions.
//
// Exit codes: 0 success, 1 verification/runtime failure, 2 usage error,
// 3 iteration cap exhausted without --allow-cap.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "smd/smd.hpp"

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string out_dir_default(const char* fallback) {
  if (const char* env = std::getenv("SMDOPT_OUT_DIR")) return env;
  return fallback;
}

smd::Vector start_point(const smd::ProblemInstance& inst, std::string choice) {
  const auto n = inst.dimension;
  if (choice.empty()) {
    if (inst.setup_kind == smd::ProxKind::entropy_simplex)
      choice = "barycenter";
    else if (inst.metadata.generator == "fts")
      choice = "origin";
    else
      choice = "uniform-norm";
  }
  if (choice == "uniform-norm") {
    if (inst.setup_kind != smd::ProxKind::euclidean_ball)
      throw UsageError("--x0 uniform-norm applies to ball instances only");
    return smd::Vector::Constant(n, inst.radius / std::sqrt(static_cast<double>(n)));
  }
  if (choice == "origin") {
    if (inst.setup_kind != smd::ProxKind::euclidean_ball)
      throw UsageError("--x0 origin applies to ball instances only");
    return smd::Vector::Zero(n);
  }
  if (choice == "barycenter") {
    if (inst.setup_kind != smd::ProxKind::entropy_simplex)
      throw UsageError("--x0 barycenter applies to simplex instances only");
    return smd::Vector::Constant(n, 1.0 / static_cast<double>(n));
  }
  throw UsageError("--x0 must be one of: uniform-norm, origin, barycenter");
}

smd::Algorithm parse_alg(const std::string& s) {
  if (s == "standard") return smd::Algorithm::standard;
  if (s == "modified") return smd::Algorithm::modified;
  throw UsageError("--alg must be 'standard' or 'modified'");
}

smd::OracleMode parse_mode(const std::string& s) {
  if (s == "stochastic") return smd::OracleMode::stochastic;
  if (s == "exact") return smd::OracleMode::exact;
  throw UsageError("--mode must be 'stochastic' or 'exact'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> parse_eps_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("bad epsilon value '" + tok + "'");
    }
    if (!(out.back() > 0.0)) throw UsageError("epsilon values must be positive");
  }
  if (out.empty()) throw UsageError("empty epsilon list");
  return out;
}

// "1,2,5" or "1:10" (inclusive range)
std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  const auto colon = s.find(':');
  try {
    if (colon != std::string::npos) {
      const std::uint64_t lo = std::stoull(s.substr(0, colon));
      const std::uint64_t hi = std::stoull(s.substr(colon + 1));
      if (hi < lo) throw UsageError("seed range is empty");
      for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      for (const auto& tok : split_list(s)) out.push_back(std::stoull(tok));
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("bad seed list '" + s + "' (use comma list or lo:hi)");
  }
  if (out.empty()) throw UsageError("empty seed list");
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void append_csv_row(const std::string& path, const std::string& header, const std::string& row) {
  const bool need_header = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for append");
  if (need_header) os << header << "\n";
  os << row << "\n";
}

// ---------------------------------------------------------------------- generate

int cmd_generate(const std::string& example, long long n, long long m, long long N,
                 const std::string& dist_str, std::uint64_t seed, std::string out) {
  smd::ProblemInstance inst;
  if (example == "1" || example == "2") {
    if (N < 1) throw UsageError("--N (number of summands) is required for examples 1 and 2");
    if (dist_str.empty()) throw UsageError("--dist is required for examples 1 and 2");
    const auto dist = smd::parse_distribution(dist_str);
    inst = example == "1" ? smd::make_example1(N, n, m, dist, seed)
                          : smd::make_example2(N, n, m, dist, seed);
  } else if (example == "fts") {
    if (N < 1) throw UsageError("--N (number of anchor points) is required for fts");
    if (!dist_str.empty())
      throw UsageError("--dist is not accepted for fts: anchors are always uniform in the ball");
    inst = smd::make_fts(N, n, m, seed);
  } else if (example == "simplex") {
    if (N != 0)
      throw UsageError("--N is not accepted for simplex: the objective matrix is n x n");
    if (dist_str.empty()) throw UsageError("--dist is required for simplex");
    inst = smd::make_simplex(n, m, smd::parse_distribution(dist_str), seed);
  } else {
    throw UsageError("--example must be one of: 1, 2, fts, simplex");
  }

  if (out.empty())
    out = out_dir_default("./instances") + ("/" + inst.metadata.name + ".prob");
  if (const fs::path parent = fs::path(out).parent_path(); !parent.empty())
    fs::create_directories(parent);
  smd::save_instance(inst, out);

  const smd::CompiledProblem prob = smd::compile(inst);
  std::cout << "instance   " << inst.metadata.name << "\n"
            << "objective  " << smd::to_string(inst.objective_kind) << " (N=" << inst.metadata.terms
            << ", n=" << inst.dimension << ")\n"
            << "constraints linear-max, m=" << inst.alpha.rows() << "\n"
            << "setup      " << smd::to_string(inst.setup_kind)
            << ", theta0=" << smd::format_double(prob.setup.theta0()) << "\n"
            << "bounds     M_f=" << smd::format_double(prob.objective->lipschitz_bound())
            << ", M_g=" << smd::format_double(prob.constraints->lipschitz_bound()) << "\n";
  if (!inst.metadata.notes.empty()) std::cout << "notes      " << inst.metadata.notes << "\n";
  std::cout << "wrote      " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------- solve

int cmd_solve(const std::string& instance_path, const std::string& alg, double eps,
              std::uint64_t seed, const std::string& x0, double theta0, std::uint64_t cap,
              bool allow_cap, const std::string& mode, const std::string& record_path,
              const std::string& trace_path, const std::string& csv_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const smd::ProblemInstance inst = smd::load_instance(instance_path);
  const smd::CompiledProblem prob = smd::compile(inst);

  smd::SolverConfig cfg;
  cfg.epsilon = eps;
  cfg.seed = seed;
  cfg.theta0 = theta0;
  cfg.max_iterations = cap;
  cfg.algorithm = parse_alg(alg);
  cfg.oracle_mode = parse_mode(mode);
  cfg.start = start_point(inst, x0);
  if (!trace_path.empty()) {
    cfg.record_iterates = true;
    cfg.record_step_values = true;
  }

  const smd::Solution sol = smd::solve(prob.setup, *prob.objective, *prob.constraints, cfg);
  const double total_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string row = smd::csv_row(sol, inst.metadata.name, total_s);
  std::cout << smd::csv_header() << "\n" << row << "\n";
  if (!csv_path.empty()) append_csv_row(csv_path, smd::csv_header(), row);
  if (!record_path.empty())
    smd::save_solution(sol, inst.metadata.name, record_path, smd::RecordKind::summary);
  if (!trace_path.empty())
    smd::save_solution(sol, inst.metadata.name, trace_path, smd::RecordKind::trace);

  if (sol.stopped_by == smd::StopReason::cap && !allow_cap) {
    std::cerr << "smdopt: iteration cap " << sol.iterations
              << " exhausted before the stopping rule fired (pass --allow-cap to accept)\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------- bench

struct BenchCell {
  smd::Algorithm alg;
  double eps;
  std::uint64_t seed;
  int rep;
};

struct CellOutcome {
  bool ok = false;
  std::string status;
  smd::Solution sol;
  double total_s = 0.0;
};

int cmd_bench(const std::string& instance_path, const std::string& algs_str,
              const std::string& eps_str, const std::string& seeds_str, int repeat, int jobs,
              const std::string& x0, const std::string& mode, std::uint64_t cap,
              bool emit_traces, std::string out_dir) {
  if (repeat < 1) throw UsageError("--repeat must be >= 1");
  if (jobs < 1) throw UsageError("--jobs must be >= 1");

  std::vector<smd::Algorithm> algs;
  for (const auto& tok : split_list(algs_str)) algs.push_back(parse_alg(tok));
  if (algs.empty()) throw UsageError("empty algorithm list");
  const std::vector<double> eps_list = parse_eps_list(eps_str);
  const std::vector<std::uint64_t> seeds = parse_seed_list(seeds_str);

  const smd::ProblemInstance inst = smd::load_instance(instance_path);
  const smd::CompiledProblem prob = smd::compile(inst);
  const smd::Vector start = start_point(inst, x0);
  const smd::OracleMode oracle_mode = parse_mode(mode);

  if (out_dir.empty()) out_dir = out_dir_default("./bench-out");
  fs::create_directories(out_dir);
  if (emit_traces) fs::create_directories(out_dir + "/traces");

  std::vector<BenchCell> cells;
  for (const auto alg : algs)
    for (const double eps : eps_list)
      for (const auto seed : seeds)
        for (int rep = 0; rep < repeat; ++rep) cells.push_back({alg, eps, seed, rep});

  std::vector<CellOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const BenchCell& cell = cells[i];
      CellOutcome& out = outcomes[i];
      smd::SolverConfig cfg;
      cfg.epsilon = cell.eps;
      cfg.seed = cell.seed;
      cfg.max_iterations = cap;
      cfg.algorithm = cell.alg;
      cfg.oracle_mode = oracle_mode;
      cfg.start = start;
      if (emit_traces) {
        cfg.record_iterates = true;
        cfg.record_step_values = true;
      }
      const auto c0 = std::chrono::steady_clock::now();
      try {
        out.sol = smd::solve(prob.setup, *prob.objective, *prob.constraints, cfg);
        out.ok = true;
        out.status = out.sol.stopped_by == smd::StopReason::cap ? "cap" : "ok";
      } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        out.status = "error: " + msg;
      }
      out.total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // results.csv: the per-run table
  {
    std::ofstream os(out_dir + "/results.csv", std::ios::trunc);
    os << smd::csv_header() << ",rep,status\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const BenchCell& cell = cells[i];
      const CellOutcome& out = outcomes[i];
      if (out.ok) {
        os << smd::csv_row(out.sol, inst.metadata.name, out.total_s);
      } else {
        // keep the row attributable even when the cell failed
        os << inst.metadata.name << ',' << smd::to_string(cell.alg) << ','
           << smd::format_double(cell.eps) << ',' << cell.seed << ",0,0,0,nan,nan,nan,0,0,0,0,none,"
           << smd::format_double(out.total_s);
      }
      os << ',' << cell.rep << ',' << out.status << "\n";
    }
  }

  if (emit_traces) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!outcomes[i].ok) continue;
      const BenchCell& cell = cells[i];
      const std::string name = std::string(smd::to_string(cell.alg)) + "-eps" +
                               smd::format_double(cell.eps) + "-s" + std::to_string(cell.seed) +
                               "-r" + std::to_string(cell.rep) + ".json";
      smd::save_solution(outcomes[i].sol, inst.metadata.name, out_dir + "/traces/" + name,
                         smd::RecordKind::trace);
    }
  }

  // summary.csv: aggregates per (algorithm, epsilon)
  std::size_t ok_cells = 0;
  {
    std::ofstream os(out_dir + "/summary.csv", std::ios::trunc);
    os << "algorithm,epsilon,runs,errors,median_iterations,mean_iterations,median_wall_time_s,"
          "mean_wall_time_s,mean_objective_at_xbar,max_constraint_at_xbar,"
          "mean_constraint_value_evals,mean_constraint_subgrad_calls,mean_objective_subgrad_calls"
       << "\n";
    for (const auto alg : algs) {
      for (const double eps : eps_list) {
        std::vector<double> iters, walls, objs, cons, cv, cs, og;
        std::size_t runs = 0, errors = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (cells[i].alg != alg || cells[i].eps != eps) continue;
          ++runs;
          if (!outcomes[i].ok) {
            ++errors;
            continue;
          }
          const smd::Solution& s = outcomes[i].sol;
          iters.push_back(static_cast<double>(s.iterations));
          walls.push_back(s.wall_time_s);
          objs.push_back(s.objective_at_xbar);
          cons.push_back(s.constraint_at_xbar);
          cv.push_back(static_cast<double>(s.calls.constraint_values));
          cs.push_back(static_cast<double>(s.calls.constraint_subgrads));
          og.push_back(static_cast<double>(s.calls.objective_subgrad));
        }
        ok_cells += runs - errors;
        os << smd::to_string(alg) << ',' << smd::format_double(eps) << ',' << runs << ','
           << errors << ',' << smd::format_double(median(iters)) << ','
           << smd::format_double(mean(iters)) << ',' << smd::format_double(median(walls)) << ','
           << smd::format_double(mean(walls)) << ',' << smd::format_double(mean(objs)) << ','
           << smd::format_double(cons.empty() ? std::numeric_limits<double>::quiet_NaN()
                                              : *std::max_element(cons.begin(), cons.end()))
           << ',' << smd::format_double(mean(cv)) << ',' << smd::format_double(mean(cs)) << ','
           << smd::format_double(mean(og)) << "\n";
      }
    }
  }

  // scaling.csv: eps vs median iterations with the fitted log-log slope,
  // reported as the exponent p in iterations ~ eps^(-p)
  {
    std::ofstream os(out_dir + "/scaling.csv", std::ios::trunc);
    os << "algorithm,epsilon,median_iterations,median_wall_time_s,loglog_slope\n";
    for (const auto alg : algs) {
      std::vector<double> xs, ys, med_iters, med_walls;
      for (const double eps : eps_list) {
        std::vector<double> iters, walls;
        for (std::size_t i = 0; i < cells.size(); ++i)
          if (cells[i].alg == alg && cells[i].eps == eps && outcomes[i].ok) {
            iters.push_back(static_cast<double>(outcomes[i].sol.iterations));
            walls.push_back(outcomes[i].sol.wall_time_s);
          }
        med_iters.push_back(median(iters));
        med_walls.push_back(median(walls));
        if (!iters.empty()) {
          xs.push_back(std::log(1.0 / eps));
          ys.push_back(std::log(median(iters)));
        }
      }
      double slope = std::numeric_limits<double>::quiet_NaN();
      if (xs.size() >= 2) {
        const double mx = mean(xs), my = mean(ys);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          sxx += (xs[i] - mx) * (xs[i] - mx);
          sxy += (xs[i] - mx) * (ys[i] - my);
        }
        if (sxx > 0.0) slope = sxy / sxx;
      }
      for (std::size_t e = 0; e < eps_list.size(); ++e)
        os << smd::to_string(alg) << ',' << smd::format_double(eps_list[e]) << ','
           << smd::format_double(med_iters[e]) << ',' << smd::format_double(med_walls[e]) << ','
           << smd::format_double(slope) << "\n";
    }
  }

  // manifest: what produced these tables
  {
    nlohmann::json j;
    j["instance"] = instance_path;
    j["instance_id"] = inst.metadata.name;
    nlohmann::json a = nlohmann::json::array();
    for (const auto alg : algs) a.push_back(smd::to_string(alg));
    j["algorithms"] = std::move(a);
    j["epsilons"] = eps_list;
    j["seeds"] = seeds;
    j["repeat"] = repeat;
    j["jobs"] = jobs;
    j["oracle_mode"] = smd::to_string(oracle_mode);
    j["emit_traces"] = emit_traces;
    std::ofstream os(out_dir + "/bench-manifest.json", std::ios::trunc);
    os << j.dump(1) << "\n";
  }

  std::cout << "bench: " << ok_cells << "/" << cells.size() << " cells succeeded; tables in "
            << out_dir << "\n";
  return ok_cells > 0 ? 0 : 1;
}

// ---------------------------------------------------------------------- verify

int cmd_verify(const std::string& instance_path, const std::string& record_path,
               const std::string& trace_path, const std::string& alg, double eps,
               std::uint64_t seed, const std::string& x0, const std::string& mode, bool lemma1,
               int seeds, int resolution, const std::string& report_path) {
  const smd::ProblemInstance inst = smd::load_instance(instance_path);
  const smd::CompiledProblem prob = smd::compile(inst);

  if (!record_path.empty() && !trace_path.empty())
    throw UsageError("pass either --record or --trace, not both");

  smd::Solution sol;
  std::string sol_id;
  if (!record_path.empty() || !trace_path.empty()) {
    sol = smd::load_solution(record_path.empty() ? trace_path : record_path, &sol_id);
    if (sol_id != inst.metadata.name)
      throw UsageError("solution was recorded on instance '" + sol_id + "', not '" +
                       inst.metadata.name + "'");
  } else {
    smd::SolverConfig cfg;
    cfg.epsilon = eps;
    cfg.seed = seed;
    cfg.algorithm = parse_alg(alg);
    cfg.oracle_mode = parse_mode(mode);
    cfg.start = start_point(inst, x0);
    if (lemma1) {
      if (cfg.oracle_mode != smd::OracleMode::exact)
        throw UsageError("--lemma1 audits a deterministic run; use --mode exact");
      cfg.record_iterates = true;
    }
    sol = smd::solve(prob.setup, *prob.objective, *prob.constraints, cfg);
    sol_id = inst.metadata.name;
  }

  std::optional<smd::GridReference> ref;
  if (inst.dimension <= 3) ref = smd::grid_search_reference(inst, resolution);

  smd::VerificationReport report = smd::audit_solution(sol, inst, ref ? &*ref : nullptr);

  if (lemma1) {
    if (!ref)
      throw UsageError("--lemma1 needs a grid reference point, so the instance must have n <= 3");
    if (sol.trace.empty() || sol.trace_stride != 1 || sol.trace.size() != sol.iterations)
      throw UsageError("--lemma1 needs a full-resolution trace: rerun with --trace or without "
                       "--record");
    smd::VerificationReport l = smd::audit_lemma1(sol, inst, ref->x_star);
    for (auto& c : l.checks) report.checks.push_back(std::move(c));
  }

  if (seeds > 0) {
    if (!ref) throw UsageError("--seeds expectation audit needs n <= 3 for the grid reference");
    smd::SolverConfig cfg;
    cfg.epsilon = eps;
    cfg.seed = seed;
    cfg.algorithm = parse_alg(alg);
    cfg.start = start_point(inst, x0);
    const smd::ExpectationAudit audit = smd::expectation_audit(inst, cfg, seeds, *ref);
    smd::CheckResult c;
    c.name = "expectation-gap";
    c.measured = audit.mean_gap;
    c.threshold = audit.epsilon + audit.slack + 2.0 * audit.std_error;
    c.pass = audit.status != 2;
    c.note = "mean over " + std::to_string(audit.seeds) + " seeds, SE=" +
             smd::format_double(audit.std_error) +
             (audit.status == 1 ? "; warning: above eps+slack but within 2 SE" : "");
    report.checks.push_back(std::move(c));
  }

  std::cout << report.to_text();
  if (ref)
    std::cout << "reference f*=" << smd::format_double(ref->f_star)
              << " (grid resolution " << ref->resolution << ", accuracy "
              << smd::format_double(ref->accuracy) << ")\n";
  std::cout << (report.all_pass() ? "VERIFY PASS" : "VERIFY FAIL") << "\n";

  if (!report_path.empty()) {
    std::ofstream os(report_path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + report_path + "'");
    os << report.to_json().dump(1) << "\n";
  }
  return report.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive mirror-descent toolkit for constrained stochastic convex problems"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a benchmark instance (.prob file)");
  std::string g_example, g_dist, g_out;
  long long g_n = 0, g_m = 0, g_N = 0;
  std::uint64_t g_seed = 1;
  gen->add_option("--example", g_example, "instance family: 1, 2, fts, simplex")->required();
  gen->add_option("--n", g_n, "dimension")->required()->check(CLI::PositiveNumber);
  gen->add_option("--m", g_m, "number of constraint components")->required()->check(CLI::PositiveNumber);
  gen->add_option("--N", g_N, "number of summands / anchors (examples 1, 2, fts)");
  gen->add_option("--dist", g_dist, "entry distribution: gumbel, exponential, uniform");
  gen->add_option("--seed", g_seed, "generation seed (default 1)");
  gen->add_option("--out", g_out, "output path (default $SMDOPT_OUT_DIR or ./instances)");

  // solve
  auto* slv = app.add_subcommand("solve", "run one algorithm on an instance");
  std::string s_instance, s_alg = "standard", s_x0, s_mode = "stochastic";
  std::string s_record, s_trace, s_csv;
  double s_eps = 0.05, s_theta0 = 0.0;
  std::uint64_t s_seed = 1, s_cap = 0;
  bool s_allow_cap = false;
  slv->add_option("--instance", s_instance, "path to a .prob file")->required()
      ->check(CLI::ExistingFile);
  slv->add_option("--alg", s_alg, "standard | modified (default standard)");
  slv->add_option("--eps", s_eps, "accuracy epsilon (default 0.05)");
  slv->add_option("--seed", s_seed, "solver seed (default 1)");
  slv->add_option("--x0", s_x0, "start: uniform-norm | origin | barycenter (default per instance)");
  slv->add_option("--theta0", s_theta0, "override the setup's theta0");
  slv->add_option("--cap", s_cap, "iteration cap (default 10x the theoretical bound)");
  slv->add_flag("--allow-cap", s_allow_cap, "exit 0 instead of 3 when the cap is exhausted");
  slv->add_option("--mode", s_mode, "oracle mode: stochastic | exact (default stochastic)");
  slv->add_option("--record", s_record, "write a solution summary JSON here");
  slv->add_option("--trace", s_trace, "write a full step trace JSON here (records iterates)");
  slv->add_option("--csv", s_csv, "append the result row to this CSV file");

  // bench
  auto* bch = app.add_subcommand("bench", "run an algorithm x epsilon x seed grid");
  std::string b_instance, b_algs = "standard,modified", b_eps = "0.05", b_seeds = "1";
  std::string b_x0, b_mode = "stochastic", b_out;
  int b_repeat = 1, b_jobs = 1;
  std::uint64_t b_cap = 0;
  bool b_traces = false;
  bch->add_option("--instance", b_instance, "path to a .prob file")->required()
      ->check(CLI::ExistingFile);
  bch->add_option("--algs", b_algs, "comma list of algorithms (default standard,modified)");
  bch->add_option("--eps", b_eps, "comma list of epsilons (default 0.05)");
  bch->add_option("--seeds", b_seeds, "comma list or lo:hi range of seeds (default 1)");
  bch->add_option("--repeat", b_repeat, "repetitions per cell, for timing stability (default 1)");
  bch->add_option("--jobs", b_jobs, "concurrent cells (default 1)");
  bch->add_option("--x0", b_x0, "start point choice");
  bch->add_option("--mode", b_mode, "oracle mode (default stochastic)");
  bch->add_option("--cap", b_cap, "iteration cap per run");
  bch->add_flag("--emit-traces", b_traces, "write a trace JSON per cell");
  bch->add_option("--out-dir", b_out, "output directory (default $SMDOPT_OUT_DIR or ./bench-out)");

  // verify
  auto* ver = app.add_subcommand("verify", "audit a run against independent reference checks");
  std::string v_instance, v_record, v_trace, v_alg = "standard", v_x0, v_mode = "exact";
  std::string v_report;
  double v_eps = 0.05;
  std::uint64_t v_seed = 1;
  bool v_lemma1 = false;
  int v_seeds = 0, v_resolution = 200;
  ver->add_option("--instance", v_instance, "path to a .prob file")->required()
      ->check(CLI::ExistingFile);
  ver->add_option("--record", v_record, "audit this solution summary instead of running");
  ver->add_option("--trace", v_trace, "audit this trace file instead of running");
  ver->add_option("--alg", v_alg, "algorithm for a fresh run (default standard)");
  ver->add_option("--eps", v_eps, "epsilon for a fresh run (default 0.05)");
  ver->add_option("--seed", v_seed, "seed for a fresh run (default 1)");
  ver->add_option("--x0", v_x0, "start point choice");
  ver->add_option("--mode", v_mode, "oracle mode for a fresh run (default exact)");
  ver->add_flag("--lemma1", v_lemma1, "re-check the per-step descent inequality (needs n <= 3)");
  ver->add_option("--seeds", v_seeds, "run a multi-seed expectation audit with this many seeds");
  ver->add_option("--resolution", v_resolution, "grid resolution for the reference optimum");
  ver->add_option("--report", v_report, "write the verification report JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmd_generate(g_example, g_n, g_m, g_N, g_dist, g_seed, g_out);
    if (slv->parsed())
      return cmd_solve(s_instance, s_alg, s_eps, s_seed, s_x0, s_theta0, s_cap, s_allow_cap,
                       s_mode, s_record, s_trace, s_csv);
    if (bch->parsed())
      return cmd_bench(b_instance, b_algs, b_eps, b_seeds, b_repeat, b_jobs, b_x0, b_mode, b_cap,
                       b_traces, b_out);
    if (ver->parsed())
      return cmd_verify(v_instance, v_record, v_trace, v_alg, v_eps, v_seed, v_x0, v_mode,
                        v_lemma1, v_seeds, v_resolution, v_report);
  } catch (const UsageError& e) {
    std::cerr << "smdopt: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "smdopt: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "smdopt: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
