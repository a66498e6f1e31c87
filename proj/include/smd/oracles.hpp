#pragma once

// First-order oracles for the solver.
//
// An objective oracle reports exact values f(x) and draws stochastic
// subgradients satisfying the two standing assumptions: the draw is unbiased,
// E[G(x,xi)] is a subgradient of f at x, and its Euclidean norm is bounded
// almost surely by lipschitz_bound().  Constraint oracles expose m convex
// components g_j and the same subgradient contract per component; the solver
// treats g = max_j g_j.
//
// Oracles are immutable after construction.  All randomness comes through the
// caller's RngStream, so one oracle can serve concurrent runs.

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "smd/prox.hpp"
#include "smd/rng.hpp"

namespace smd {

// Row-major storage so that per-row dot products walk contiguous memory.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MaxComponent {
  int index = -1;     // smallest argmax
  double value = 0.0;
};

struct Violation {
  int index = -1;     // smallest j with g_j(x) > eps
  double value = 0.0; // g_j(x) at that index
};

// Result of one left-to-right constraint scan: the first violation if any,
// the largest value among the components actually evaluated, and how many
// evaluations that took.
struct ConstraintScan {
  std::optional<Violation> violation;
  double max_seen = 0.0;
  int evaluated = 0;
};

class ObjectiveOracle {
public:
  virtual ~ObjectiveOracle() = default;

  virtual double value(const Vector& x) const = 0;
  virtual void stochastic_subgrad(const Vector& x, RngStream& rng, Vector& out) const = 0;

  virtual bool has_exact_subgrad() const noexcept { return false; }
  virtual void exact_subgrad(const Vector& /*x*/, Vector& /*out*/) const {
    throw std::logic_error("objective oracle does not expose an exact subgradient");
  }

  // Almost-sure Euclidean bound on every stochastic subgradient draw.
  virtual double lipschitz_bound() const noexcept = 0;

  Vector stochastic_subgrad(const Vector& x, RngStream& rng) const {
    Vector g(x.size());
    stochastic_subgrad(x, rng, g);
    return g;
  }
  Vector exact_subgrad(const Vector& x) const {
    Vector g(x.size());
    exact_subgrad(x, g);
    return g;
  }
};

class ConstraintOracle {
public:
  virtual ~ConstraintOracle() = default;

  virtual int count() const noexcept = 0;
  virtual double value(int j, const Vector& x) const = 0;

  virtual MaxComponent max_component(const Vector& x) const {
    MaxComponent best;
    for (int j = 0; j < count(); ++j) {
      const double v = value(j, x);
      if (j == 0 || v > best.value) best = {j, v};
    }
    return best;
  }

  double max_value(const Vector& x) const { return max_component(x).value; }

  virtual ConstraintScan scan_first_violated(const Vector& x, double eps) const {
    ConstraintScan scan;
    for (int j = 0; j < count(); ++j) {
      const double v = value(j, x);
      scan.max_seen = (j == 0) ? v : std::max(scan.max_seen, v);
      scan.evaluated = j + 1;
      if (v > eps) {
        scan.violation = Violation{j, v};
        return scan;
      }
    }
    return scan;
  }

  std::optional<Violation> first_violated(const Vector& x, double eps) const {
    return scan_first_violated(x, eps).violation;
  }

  virtual void stochastic_subgrad(int j, const Vector& x, RngStream& rng, Vector& out) const = 0;

  virtual bool has_exact_subgrad() const noexcept { return false; }
  virtual void exact_subgrad(int /*j*/, const Vector& /*x*/, Vector& /*out*/) const {
    throw std::logic_error("constraint oracle does not expose an exact subgradient");
  }

  virtual double lipschitz_bound() const noexcept = 0;

  Vector stochastic_subgrad(int j, const Vector& x, RngStream& rng) const {
    Vector g(x.size());
    stochastic_subgrad(j, x, rng, g);
    return g;
  }
  Vector exact_subgrad(int j, const Vector& x) const {
    Vector g(x.size());
    exact_subgrad(j, x, g);
    return g;
  }

protected:
  void require_index(int j) const {
    if (j < 0 || j >= count())
      throw std::out_of_range("constraint index " + std::to_string(j) + " out of range [0," +
                              std::to_string(count()) + ")");
  }
};

namespace detail {
inline double sign(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}

// f(x) = (1/N) sum_i |<a_i, x> - b_i|.
// Stochastic draw: pick i uniformly, return sign(<a_i,x> - b_i) * a_i.
class AbsLinearObjective final : public ObjectiveOracle {
public:
  using ObjectiveOracle::exact_subgrad;
  using ObjectiveOracle::stochastic_subgrad;

  AbsLinearObjective(Matrix coefficients, Vector offsets)
      : a_(std::move(coefficients)), b_(std::move(offsets)) {
    if (a_.rows() < 1 || a_.rows() != b_.size())
      throw std::invalid_argument("abs_linear_objective: need N >= 1 rows and matching offsets");
    bound_ = 0.0;
    for (Eigen::Index i = 0; i < a_.rows(); ++i)
      bound_ = std::max(bound_, a_.row(i).norm());
  }

  double value(const Vector& x) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a_.rows(); ++i)
      s += std::abs(a_.row(i).dot(x) - b_[i]);
    return s / static_cast<double>(a_.rows());
  }

  void stochastic_subgrad(const Vector& x, RngStream& rng, Vector& out) const override {
    const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(a_.rows())));
    const double s = detail::sign(a_.row(i).dot(x) - b_[i]);
    if (s == 0.0)
      out.setZero(a_.cols());
    else
      out = s * a_.row(i).transpose();
  }

  bool has_exact_subgrad() const noexcept override { return true; }
  void exact_subgrad(const Vector& x, Vector& out) const override {
    out.setZero(a_.cols());
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
      const double s = detail::sign(a_.row(i).dot(x) - b_[i]);
      if (s != 0.0) out += s * a_.row(i).transpose();
    }
    out /= static_cast<double>(a_.rows());
  }

  double lipschitz_bound() const noexcept override { return bound_; }

  Eigen::Index terms() const noexcept { return a_.rows(); }

private:
  RowMatrix a_;
  Vector b_;
  double bound_ = 0.0;
};

// f(x) = 0.5 * x' Cbar x with Cbar the average of N symmetric PSD matrices.
// Stochastic draw: pick i uniformly, return C_i x.  The a.s. bound is
// max_i ||C_i||_2 times the radius of the feasible ball.
class QuadraticSumObjective final : public ObjectiveOracle {
public:
  using ObjectiveOracle::exact_subgrad;
  using ObjectiveOracle::stochastic_subgrad;

  QuadraticSumObjective(std::vector<Matrix> terms, double feasible_radius)
      : c_(std::move(terms)), radius_(feasible_radius) {
    if (c_.empty()) throw std::invalid_argument("quadratic_sum_objective: need at least one matrix");
    if (!(radius_ > 0.0))
      throw std::invalid_argument("quadratic_sum_objective: feasible radius must be positive");
    const Eigen::Index n = c_.front().rows();
    double max_norm = 0.0;
    c_mean_ = Matrix::Zero(n, n);
    for (auto& c : c_) {
      if (c.rows() != n || c.cols() != n)
        throw std::invalid_argument("quadratic_sum_objective: matrices must be square and equal-sized");
      c = 0.5 * (c + c.transpose()).eval();
      c_mean_ += c;
      Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
      max_norm = std::max(max_norm, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    c_mean_ /= static_cast<double>(c_.size());
    bound_ = max_norm * radius_;
  }

  double value(const Vector& x) const override { return 0.5 * x.dot(c_mean_ * x); }

  void stochastic_subgrad(const Vector& x, RngStream& rng, Vector& out) const override {
    const auto i = static_cast<std::size_t>(rng.below(c_.size()));
    out.noalias() = c_[i] * x;
  }

  bool has_exact_subgrad() const noexcept override { return true; }
  void exact_subgrad(const Vector& x, Vector& out) const override {
    out.noalias() = c_mean_ * x;
  }

  double lipschitz_bound() const noexcept override { return bound_; }

  Eigen::Index terms() const noexcept { return static_cast<Eigen::Index>(c_.size()); }
  const Matrix& term(Eigen::Index i) const { return c_.at(static_cast<std::size_t>(i)); }

private:
  std::vector<Matrix> c_;
  Matrix c_mean_;
  double radius_ = 0.0;
  double bound_ = 0.0;
};

// f(x) = sum_k ||x - A_k||_2 (unnormalized).  Stochastic draw: pick k
// uniformly, return N * (x - A_k)/||x - A_k||, or zero exactly at an anchor.
// Every draw has norm N or 0, so the a.s. bound is N.
class SumOfNormsObjective final : public ObjectiveOracle {
public:
  using ObjectiveOracle::exact_subgrad;
  using ObjectiveOracle::stochastic_subgrad;

  explicit SumOfNormsObjective(Matrix anchors) : anchors_(std::move(anchors)) {
    if (anchors_.rows() < 1)
      throw std::invalid_argument("sum_of_norms_objective: need at least one anchor");
  }

  double value(const Vector& x) const override {
    double s = 0.0;
    for (Eigen::Index k = 0; k < anchors_.rows(); ++k)
      s += (x.transpose() - anchors_.row(k)).norm();
    return s;
  }

  void stochastic_subgrad(const Vector& x, RngStream& rng, Vector& out) const override {
    const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(anchors_.rows())));
    out = x - anchors_.row(k).transpose();
    const double nrm = out.norm();
    if (nrm > 0.0)
      out *= static_cast<double>(anchors_.rows()) / nrm;
    else
      out.setZero();
  }

  bool has_exact_subgrad() const noexcept override { return true; }
  void exact_subgrad(const Vector& x, Vector& out) const override {
    out.setZero(anchors_.cols());
    Vector d(anchors_.cols());
    for (Eigen::Index k = 0; k < anchors_.rows(); ++k) {
      d = x - anchors_.row(k).transpose();
      const double nrm = d.norm();
      if (nrm > 0.0) out += d / nrm;
    }
  }

  double lipschitz_bound() const noexcept override {
    return static_cast<double>(anchors_.rows());
  }

  Eigen::Index terms() const noexcept { return anchors_.rows(); }

private:
  RowMatrix anchors_;  // one anchor per row
};

// f(x) = 0.5 * x' A x on the probability simplex, A symmetric with bounded
// entries.  Stochastic draw: sample a column index from the categorical
// distribution given by x itself and return that column, so the expectation
// over the index equals A x without ever forming the full product.
class SimplexQuadraticObjective final : public ObjectiveOracle {
public:
  using ObjectiveOracle::exact_subgrad;
  using ObjectiveOracle::stochastic_subgrad;

  explicit SimplexQuadraticObjective(Matrix a) : a_(std::move(a)) {
    if (a_.rows() < 1 || a_.rows() != a_.cols())
      throw std::invalid_argument("simplex_column_sampler: matrix must be square");
    a_ = 0.5 * (a_ + a_.transpose()).eval();
    bound_ = 0.0;
    for (Eigen::Index j = 0; j < a_.cols(); ++j)
      bound_ = std::max(bound_, a_.col(j).norm());
  }

  double value(const Vector& x) const override { return 0.5 * x.dot(a_ * x); }

  void stochastic_subgrad(const Vector& x, RngStream& rng, Vector& out) const override {
    out = a_.col(sample_index(x, rng));
  }

  bool has_exact_subgrad() const noexcept override { return true; }
  void exact_subgrad(const Vector& x, Vector& out) const override { out.noalias() = a_ * x; }

  double lipschitz_bound() const noexcept override { return bound_; }

  const Matrix& matrix() const noexcept { return a_; }

private:
  Eigen::Index sample_index(const Vector& x, RngStream& rng) const {
    if (x.size() != a_.cols() || (x.array() < -kFeasibilityTol).any() ||
        std::abs(x.sum() - 1.0) > 1e-6)
      throw std::domain_error("simplex_column_sampler: point is not a probability vector");
    const double u = rng.uniform() * x.sum();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      acc += std::max(x[i], 0.0);
      if (u < acc) return i;
    }
    return x.size() - 1;
  }

  Matrix a_;
  double bound_ = 0.0;
};

// g_j(x) = <alpha_j, x> + beta_j; g = max over rows.  Subgradients are the
// rows themselves, so the stochastic and exact oracles coincide.
class LinearMaxConstraints final : public ConstraintOracle {
public:
  using ConstraintOracle::exact_subgrad;
  using ConstraintOracle::stochastic_subgrad;

  LinearMaxConstraints(Matrix alpha, Vector beta)
      : alpha_(std::move(alpha)), beta_(std::move(beta)) {
    if (alpha_.rows() < 1 || alpha_.rows() != beta_.size())
      throw std::invalid_argument("linear_max_constraints: need m >= 1 rows and matching offsets");
    bound_ = 0.0;
    for (Eigen::Index j = 0; j < alpha_.rows(); ++j)
      bound_ = std::max(bound_, alpha_.row(j).norm());
  }

  int count() const noexcept override { return static_cast<int>(alpha_.rows()); }

  double value(int j, const Vector& x) const override {
    require_index(j);
    return alpha_.row(j).dot(x) + beta_[j];
  }

  MaxComponent max_component(const Vector& x) const override {
    MaxComponent best;
    for (Eigen::Index j = 0; j < alpha_.rows(); ++j) {
      const double v = alpha_.row(j).dot(x) + beta_[j];
      if (j == 0 || v > best.value) best = {static_cast<int>(j), v};
    }
    return best;
  }

  ConstraintScan scan_first_violated(const Vector& x, double eps) const override {
    ConstraintScan scan;
    for (Eigen::Index j = 0; j < alpha_.rows(); ++j) {
      const double v = alpha_.row(j).dot(x) + beta_[j];
      scan.max_seen = (j == 0) ? v : std::max(scan.max_seen, v);
      scan.evaluated = static_cast<int>(j) + 1;
      if (v > eps) {
        scan.violation = Violation{static_cast<int>(j), v};
        return scan;
      }
    }
    return scan;
  }

  void stochastic_subgrad(int j, const Vector& x, RngStream&, Vector& out) const override {
    exact_subgrad(j, x, out);
  }

  bool has_exact_subgrad() const noexcept override { return true; }
  void exact_subgrad(int j, const Vector&, Vector& out) const override {
    require_index(j);
    out = alpha_.row(j).transpose();
  }

  double lipschitz_bound() const noexcept override { return bound_; }

  const RowMatrix& alpha() const noexcept { return alpha_; }
  const Vector& beta() const noexcept { return beta_; }

private:
  RowMatrix alpha_;
  Vector beta_;
  double bound_ = 0.0;
};

inline std::unique_ptr<ObjectiveOracle> abs_linear_objective(Matrix a, Vector b) {
  return std::make_unique<AbsLinearObjective>(std::move(a), std::move(b));
}
inline std::unique_ptr<ObjectiveOracle> quadratic_sum_objective(std::vector<Matrix> c,
                                                                double feasible_radius) {
  return std::make_unique<QuadraticSumObjective>(std::move(c), feasible_radius);
}
inline std::unique_ptr<ObjectiveOracle> sum_of_norms_objective(Matrix anchors) {
  return std::make_unique<SumOfNormsObjective>(std::move(anchors));
}
inline std::unique_ptr<ObjectiveOracle> simplex_column_sampler(Matrix a) {
  return std::make_unique<SimplexQuadraticObjective>(std::move(a));
}
inline std::unique_ptr<ConstraintOracle> linear_max_constraints(Matrix alpha, Vector beta) {
  return std::make_unique<LinearMaxConstraints>(std::move(alpha), std::move(beta));
}

} // namespace smd
