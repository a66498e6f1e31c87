#pragma once

// Benchmark problem instances and their on-disk format.
//
// All generated instances share the same constraint family (rows of a Toeplitz
// matrix, g_j(x) = <alpha_j, x> + beta_j) and differ in the objective:
//   example1  f(x) = (1/N) sum_i |<a_i, x> - b_i|          unit ball
//   example2  f(x) = (1/2N) sum_i <C_i x, x>, C_i PD       unit ball
//   fts       f(x) = sum_k ||x - A_k||_2                   unit ball
//   simplex   f(x) = 0.5 <A x, x>, A symmetric             probability simplex
//
// Instances carry generation metadata (generator, distribution, seed, sizes)
// sufficient to rebuild them bit-for-bit, and serialize to a .prob file: a
// plain-text header followed by row-major little-endian float64 payloads.

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "smd/oracles.hpp"
#include "smd/prox.hpp"
#include "smd/rng.hpp"

namespace smd {

enum class Distribution { gumbel, exponential, uniform };
enum class ObjectiveKind { abs_linear, quadratic_sum, sum_of_norms, simplex_quadratic };

inline const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::gumbel: return "gumbel";
    case Distribution::exponential: return "exponential";
    case Distribution::uniform: return "uniform";
  }
  return "?";
}

inline const char* to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::abs_linear: return "abs-linear";
    case ObjectiveKind::quadratic_sum: return "quadratic-sum";
    case ObjectiveKind::sum_of_norms: return "sum-of-norms";
    case ObjectiveKind::simplex_quadratic: return "simplex-quadratic";
  }
  return "?";
}

inline Distribution parse_distribution(const std::string& s) {
  if (s == "gumbel") return Distribution::gumbel;
  if (s == "exponential") return Distribution::exponential;
  if (s == "uniform") return Distribution::uniform;
  throw std::invalid_argument("unknown distribution '" + s + "' (gumbel|exponential|uniform)");
}

struct GenerationMetadata {
  std::string name;            // instance id used in result tables
  std::string generator;       // example1|example2|fts|simplex|custom
  std::string distribution;    // gumbel|exponential|uniform|none
  std::uint64_t seed = 0;
  Eigen::Index terms = 0;      // N (summands / matrices / anchors)
  Eigen::Index dimension = 0;  // n
  Eigen::Index constraints = 0;// m
  std::string notes;
};

struct ProblemInstance {
  ObjectiveKind objective_kind = ObjectiveKind::abs_linear;
  Matrix coeffs;                 // abs-linear: A' (N x n); sum-of-norms: anchors (N x n);
                                 // simplex-quadratic: A (n x n)
  Vector offsets;                // abs-linear: b
  std::vector<Matrix> quad_terms;// quadratic-sum: C_1..C_N
  Matrix alpha;                  // m x n
  Vector beta;                   // m
  ProxKind setup_kind = ProxKind::euclidean_ball;
  Eigen::Index dimension = 0;
  double radius = 1.0;           // ball setups only
  double theta0 = 0.0;           // 0 -> setup default
  GenerationMetadata metadata;

  ProxSetup make_setup() const {
    switch (setup_kind) {
      case ProxKind::euclidean_ball:
        return ProxSetup::euclidean_ball(dimension, radius, theta0);
      case ProxKind::entropy_simplex:
        return ProxSetup::entropy_simplex(dimension, theta0);
      default:
        throw std::invalid_argument("problem instances support ball and simplex setups only");
    }
  }

  std::unique_ptr<ObjectiveOracle> make_objective() const {
    switch (objective_kind) {
      case ObjectiveKind::abs_linear: return abs_linear_objective(coeffs, offsets);
      case ObjectiveKind::quadratic_sum: return quadratic_sum_objective(quad_terms, radius);
      case ObjectiveKind::sum_of_norms: return sum_of_norms_objective(coeffs);
      case ObjectiveKind::simplex_quadratic: return simplex_column_sampler(coeffs);
    }
    throw std::logic_error("unreachable");
  }

  std::unique_ptr<ConstraintOracle> make_constraints() const {
    return linear_max_constraints(alpha, beta);
  }
};

struct CompiledProblem {
  ProxSetup setup;
  std::unique_ptr<ObjectiveOracle> objective;
  std::unique_ptr<ConstraintOracle> constraints;
};

inline CompiledProblem compile(const ProblemInstance& inst) {
  return CompiledProblem{inst.make_setup(), inst.make_objective(), inst.make_constraints()};
}

// Constraint matrix with first row all ones, first column (1,2,...,m), and
// constant diagonals.  The full (n+1)-column matrix is split into the
// coefficient block alpha and the offset column beta (its last column).
inline std::pair<Matrix, Vector> toeplitz_constraints(int m, int n) {
  if (m < 1 || n < 1) throw std::invalid_argument("toeplitz_constraints: m, n must be positive");
  Matrix b(m, n + 1);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= n; ++j)
      b(i, j) = j >= i ? 1.0 : static_cast<double>(i - j + 1);
  return {b.leftCols(n), b.col(n)};
}

// Entry-wise i.i.d. fill in row-major order.  Gumbel is location 1 / scale 2,
// exponential is scale 1, uniform is [0,1); all via inverse-CDF transforms so
// the matrices are reproducible bit-for-bit from the seed.
inline Matrix generate_random_matrix(Eigen::Index rows, Eigen::Index cols, Distribution dist,
                                     RngStream& rng) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("generate_random_matrix: dimensions must be positive");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      switch (dist) {
        case Distribution::gumbel: m(i, j) = rng.gumbel(1.0, 2.0); break;
        case Distribution::exponential: m(i, j) = rng.exponential(1.0); break;
        case Distribution::uniform: m(i, j) = rng.uniform(); break;
      }
    }
  }
  return m;
}

namespace detail {
inline std::string instance_name(const char* gen, Eigen::Index terms, Eigen::Index n,
                                 Eigen::Index m, const char* dist, std::uint64_t seed) {
  std::string s = gen;
  s += "-N" + std::to_string(terms) + "-n" + std::to_string(n) + "-m" + std::to_string(m);
  if (dist && *dist) s += std::string("-") + dist;
  s += "-s" + std::to_string(seed);
  return s;
}
} // namespace detail

// f(x) = (1/N) sum |<a_i,x> - b_i| over the unit ball.  A single N x (n+1)
// random matrix supplies both the coefficient rows and (last column) the
// offsets.
inline ProblemInstance make_example1(Eigen::Index N, Eigen::Index n, Eigen::Index m,
                                     Distribution dist, std::uint64_t seed) {
  if (N < 1 || n < 1 || m < 1) throw std::invalid_argument("make_example1: sizes must be positive");
  RngStream rng = RngStream(seed).split(1);
  const Matrix a = generate_random_matrix(N, n + 1, dist, rng);

  ProblemInstance inst;
  inst.objective_kind = ObjectiveKind::abs_linear;
  inst.coeffs = a.leftCols(n);
  inst.offsets = a.col(n);
  std::tie(inst.alpha, inst.beta) = toeplitz_constraints(static_cast<int>(m), static_cast<int>(n));
  inst.setup_kind = ProxKind::euclidean_ball;
  inst.dimension = n;
  inst.radius = 1.0;
  inst.theta0 = std::sqrt(2.0);
  inst.metadata = {detail::instance_name("ex1", N, n, m, to_string(dist), seed),
                   "example1", to_string(dist), seed, N, n, m, ""};
  return inst;
}

// f(x) = (1/2N) sum <C_i x, x> over the unit ball, C_i symmetric PD.  Raw
// draws are symmetrized; any draw that is not PD afterwards is shifted by
// (|lambda_min| + 0.1) * I.  The number of shifted matrices lands in the
// metadata notes.
inline ProblemInstance make_example2(Eigen::Index N, Eigen::Index n, Eigen::Index m,
                                     Distribution dist, std::uint64_t seed) {
  if (N < 1 || n < 1 || m < 1) throw std::invalid_argument("make_example2: sizes must be positive");
  RngStream rng = RngStream(seed).split(2);
  ProblemInstance inst;
  inst.quad_terms.reserve(static_cast<std::size_t>(N));
  int repaired = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    Matrix c = generate_random_matrix(n, n, dist, rng);
    c = 0.5 * (c + c.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin <= 0.0) {
      c += (std::abs(lmin) + 0.1) * Matrix::Identity(n, n);
      ++repaired;
    }
    inst.quad_terms.push_back(std::move(c));
  }
  inst.objective_kind = ObjectiveKind::quadratic_sum;
  std::tie(inst.alpha, inst.beta) = toeplitz_constraints(static_cast<int>(m), static_cast<int>(n));
  inst.setup_kind = ProxKind::euclidean_ball;
  inst.dimension = n;
  inst.radius = 1.0;
  inst.theta0 = std::sqrt(2.0);
  inst.metadata = {detail::instance_name("ex2", N, n, m, to_string(dist), seed),
                   "example2", to_string(dist), seed, N, n, m,
                   "pd-shift=" + std::to_string(repaired)};
  return inst;
}

// Fermat-Torricelli-Steiner: f(x) = sum_k ||x - A_k|| over the unit ball.
// Anchor coordinates are uniform [0,1); any anchor with norm > 1 is pulled
// onto 0.999 times the unit sphere so all anchors sit inside the feasible
// ball.  The rescale count lands in the metadata notes.
inline ProblemInstance make_fts(Eigen::Index N, Eigen::Index n, Eigen::Index m,
                                std::uint64_t seed) {
  if (N < 1 || n < 1 || m < 1) throw std::invalid_argument("make_fts: sizes must be positive");
  RngStream rng = RngStream(seed).split(3);
  Matrix anchors = generate_random_matrix(N, n, Distribution::uniform, rng);
  int rescaled = 0;
  for (Eigen::Index k = 0; k < N; ++k) {
    const double nrm = anchors.row(k).norm();
    if (nrm > 1.0) {
      anchors.row(k) *= 0.999 / nrm;
      ++rescaled;
    }
  }
  ProblemInstance inst;
  inst.objective_kind = ObjectiveKind::sum_of_norms;
  inst.coeffs = std::move(anchors);
  std::tie(inst.alpha, inst.beta) = toeplitz_constraints(static_cast<int>(m), static_cast<int>(n));
  inst.setup_kind = ProxKind::euclidean_ball;
  inst.dimension = n;
  inst.radius = 1.0;
  inst.theta0 = std::sqrt(2.0);
  inst.metadata = {detail::instance_name("fts", N, n, m, nullptr, seed),
                   "fts", "uniform", seed, N, n, m,
                   "anchors-rescaled=" + std::to_string(rescaled)};
  return inst;
}

// f(x) = 0.5 <A x, x> over the probability simplex with the column-sampling
// oracle.  Constraint rows are random draws recentred so the barycenter is
// strictly feasible with margin 0.1: c_i = r_i - (<r_i, bary> + 0.1) * ones,
// which gives g_i(bary) = -0.1 exactly since simplex points sum to one.
inline ProblemInstance make_simplex(Eigen::Index n, Eigen::Index m, Distribution dist,
                                    std::uint64_t seed) {
  if (n < 2 || m < 1) throw std::invalid_argument("make_simplex: need n >= 2 and m >= 1");
  RngStream rng = RngStream(seed).split(4);
  ProblemInstance inst;
  inst.objective_kind = ObjectiveKind::simplex_quadratic;
  inst.coeffs = generate_random_matrix(n, n, dist, rng);
  const Vector bary = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Matrix alpha = generate_random_matrix(m, n, dist, rng);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double offset = alpha.row(i).dot(bary) + 0.1;
    alpha.row(i).array() -= offset;
  }
  inst.alpha = std::move(alpha);
  inst.beta = Vector::Zero(m);
  inst.setup_kind = ProxKind::entropy_simplex;
  inst.dimension = n;
  inst.theta0 = std::sqrt(std::log(static_cast<double>(n)));
  inst.metadata = {detail::instance_name("simplex", n, n, m, to_string(dist), seed),
                   "simplex", to_string(dist), seed, n, n, m, ""};
  return inst;
}

// Rebuild an instance from its metadata alone (round-trip invariant).
inline ProblemInstance regenerate(const GenerationMetadata& md) {
  if (md.generator == "example1")
    return make_example1(md.terms, md.dimension, md.constraints,
                         parse_distribution(md.distribution), md.seed);
  if (md.generator == "example2")
    return make_example2(md.terms, md.dimension, md.constraints,
                         parse_distribution(md.distribution), md.seed);
  if (md.generator == "fts") return make_fts(md.terms, md.dimension, md.constraints, md.seed);
  if (md.generator == "simplex")
    return make_simplex(md.dimension, md.constraints, parse_distribution(md.distribution),
                        md.seed);
  throw std::invalid_argument("regenerate: unknown generator '" + md.generator + "'");
}

// ---------------------------------------------------------------------------
// .prob serialization
//
//   SMDPROB 1
//   <key> <value> lines (name/generator/distribution/seed/terms/dimension/
//                        constraints/notes/objective/setup/radius/theta0)
//   matrix <label> <rows> <cols>      one line per payload block, in order
//   end-header
//   <payload>  row-major float64, little-endian, blocks in declared order
//
// Scalars are written with shortest round-trip formatting, payloads preserve
// every bit, so save/load is an exact identity.

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_f64(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("malformed float '" + s + "'");
  return v;
}

inline void append_matrix_payload(std::string& out, const Matrix& m) {
  const std::size_t base = out.size();
  out.resize(base + static_cast<std::size_t>(m.size()) * 8);
  std::size_t at = base;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::uint64_t bits;
      const double v = m(i, j);
      std::memcpy(&bits, &v, 8);
      for (int b = 0; b < 8; ++b) out[at++] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
}

inline Matrix read_matrix_payload(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  std::vector<char> buf(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 8);
  is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size())
    throw std::runtime_error("truncated matrix payload");
  std::size_t at = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[at++])) << (8 * b);
      double v;
      std::memcpy(&v, &bits, 8);
      m(i, j) = v;
    }
  }
  return m;
}

inline void require_single_line(const std::string& s, const char* what) {
  if (s.find('\n') != std::string::npos || s.find('\r') != std::string::npos)
    throw std::invalid_argument(std::string(what) + " must not contain line breaks");
}

} // namespace detail

inline void save_instance(const ProblemInstance& inst, const std::string& path) {
  detail::require_single_line(inst.metadata.name, "instance name");
  detail::require_single_line(inst.metadata.notes, "instance notes");

  std::vector<std::pair<std::string, const Matrix*>> blocks;
  Matrix offsets_col, beta_col;
  switch (inst.objective_kind) {
    case ObjectiveKind::abs_linear:
      blocks.emplace_back("coeffs", &inst.coeffs);
      offsets_col = inst.offsets;
      blocks.emplace_back("offsets", &offsets_col);
      break;
    case ObjectiveKind::quadratic_sum:
      for (std::size_t i = 0; i < inst.quad_terms.size(); ++i)
        blocks.emplace_back("quad" + std::to_string(i), &inst.quad_terms[i]);
      break;
    case ObjectiveKind::sum_of_norms:
      blocks.emplace_back("anchors", &inst.coeffs);
      break;
    case ObjectiveKind::simplex_quadratic:
      blocks.emplace_back("coeffs", &inst.coeffs);
      break;
  }
  blocks.emplace_back("alpha", &inst.alpha);
  beta_col = inst.beta;
  blocks.emplace_back("beta", &beta_col);

  std::ostringstream header;
  header << "SMDPROB 1\n";
  header << "name " << inst.metadata.name << "\n";
  header << "generator " << inst.metadata.generator << "\n";
  header << "distribution " << inst.metadata.distribution << "\n";
  header << "seed " << inst.metadata.seed << "\n";
  header << "terms " << inst.metadata.terms << "\n";
  header << "dimension " << inst.metadata.dimension << "\n";
  header << "constraints " << inst.metadata.constraints << "\n";
  if (!inst.metadata.notes.empty()) header << "notes " << inst.metadata.notes << "\n";
  header << "objective " << to_string(inst.objective_kind) << "\n";
  header << "setup " << to_string(inst.setup_kind) << "\n";
  if (inst.setup_kind == ProxKind::euclidean_ball)
    header << "radius " << detail::fmt(inst.radius) << "\n";
  header << "theta0 " << detail::fmt(inst.theta0) << "\n";
  for (const auto& [label, mat] : blocks)
    header << "matrix " << label << " " << mat->rows() << " " << mat->cols() << "\n";
  header << "end-header\n";

  std::string payload;
  for (const auto& [label, mat] : blocks) detail::append_matrix_payload(payload, *mat);

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::string h = header.str();
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!os) throw std::runtime_error("short write to '" + path + "'");
}

inline ProblemInstance load_instance(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(is, line) || line != "SMDPROB 1")
    throw std::runtime_error("'" + path + "' is not an SMDPROB version-1 file");

  ProblemInstance inst;
  inst.metadata = {};
  std::string objective_str, setup_str;
  std::vector<std::tuple<std::string, Eigen::Index, Eigen::Index>> blocks;
  bool have_dim = false;

  while (std::getline(is, line)) {
    if (line == "end-header") break;
    const auto sp = line.find(' ');
    const std::string key = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (key == "name") inst.metadata.name = rest;
    else if (key == "generator") inst.metadata.generator = rest;
    else if (key == "distribution") inst.metadata.distribution = rest;
    else if (key == "seed") inst.metadata.seed = std::stoull(rest);
    else if (key == "terms") inst.metadata.terms = std::stoll(rest);
    else if (key == "dimension") { inst.metadata.dimension = std::stoll(rest); have_dim = true; }
    else if (key == "constraints") inst.metadata.constraints = std::stoll(rest);
    else if (key == "notes") inst.metadata.notes = rest;
    else if (key == "objective") objective_str = rest;
    else if (key == "setup") setup_str = rest;
    else if (key == "radius") inst.radius = detail::parse_f64(rest);
    else if (key == "theta0") inst.theta0 = detail::parse_f64(rest);
    else if (key == "matrix") {
      std::istringstream ls(rest);
      std::string label;
      Eigen::Index rows = 0, cols = 0;
      if (!(ls >> label >> rows >> cols) || rows < 1 || cols < 1)
        throw std::runtime_error("malformed matrix declaration: '" + line + "'");
      blocks.emplace_back(label, rows, cols);
    } else {
      throw std::runtime_error("unknown header key '" + key + "' in '" + path + "'");
    }
  }
  if (line != "end-header") throw std::runtime_error("missing end-header in '" + path + "'");
  if (!have_dim) throw std::runtime_error("missing dimension in '" + path + "'");
  inst.dimension = inst.metadata.dimension;

  if (objective_str == "abs-linear") inst.objective_kind = ObjectiveKind::abs_linear;
  else if (objective_str == "quadratic-sum") inst.objective_kind = ObjectiveKind::quadratic_sum;
  else if (objective_str == "sum-of-norms") inst.objective_kind = ObjectiveKind::sum_of_norms;
  else if (objective_str == "simplex-quadratic")
    inst.objective_kind = ObjectiveKind::simplex_quadratic;
  else throw std::runtime_error("unknown objective kind '" + objective_str + "'");

  if (setup_str == "euclidean-ball") inst.setup_kind = ProxKind::euclidean_ball;
  else if (setup_str == "entropy-simplex") inst.setup_kind = ProxKind::entropy_simplex;
  else throw std::runtime_error("unknown setup kind '" + setup_str + "'");

  for (const auto& [label, rows, cols] : blocks) {
    Matrix m = detail::read_matrix_payload(is, rows, cols);
    if (label == "coeffs" || label == "anchors") inst.coeffs = std::move(m);
    else if (label == "offsets") inst.offsets = m.col(0);
    else if (label == "alpha") inst.alpha = std::move(m);
    else if (label == "beta") inst.beta = m.col(0);
    else if (label.rfind("quad", 0) == 0) inst.quad_terms.push_back(std::move(m));
    else throw std::runtime_error("unknown matrix label '" + label + "'");
  }

  if (inst.alpha.rows() < 1 || inst.alpha.rows() != inst.beta.size())
    throw std::runtime_error("instance '" + path + "' has inconsistent constraint blocks");
  if (inst.alpha.cols() != inst.dimension)
    throw std::runtime_error("instance '" + path + "' has constraint width != dimension");
  return inst;
}

} // namespace smd
