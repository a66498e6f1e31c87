#pragma once

// Proximal setups: a feasible set Q together with a distance-generating
// function d that is 1-strongly convex on Q w.r.t. the Euclidean norm, the
// induced Bregman divergence V(x,y), and the mirror step
//
//   mirr(x, p) = argmin_{u in Q} ( <p, u> + V(x, u) ).
//
// Three setups are provided, each with a closed-form mirror step:
//   * euclidean_ball    d = 0.5*|x|^2 on { |x| <= r }         (radial clip)
//   * euclidean_box     d = 0.5*|x|^2 on a coordinate box      (clamp)
//   * entropy_simplex   d = sum x_i ln x_i on the probability simplex
//                       (multiplicative-weights update)

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "smd/rng.hpp"

namespace smd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ProxKind { euclidean_ball, euclidean_box, entropy_simplex };

inline const char* to_string(ProxKind k) {
  switch (k) {
    case ProxKind::euclidean_ball: return "euclidean-ball";
    case ProxKind::euclidean_box: return "euclidean-box";
    case ProxKind::entropy_simplex: return "entropy-simplex";
  }
  return "?";
}

// Feasibility drift up to this tolerance is repaired silently; anything worse
// is treated as a caller bug.
inline constexpr double kFeasibilityTol = 1e-9;

// Coordinates are floored at this value inside logs so that simplex points
// with (legitimately) zero entries do not produce -inf weights.
inline constexpr double kEntropyFloor = 1e-300;

struct Theta0Report {
  double max_bregman = 0.0;   // largest V(x,y) seen over sampled pairs
  double theta0_squared = 0.0;
  int samples = 0;
  bool pass = false;          // max_bregman <= theta0_squared
};

class ProxSetup {
public:
  static ProxSetup euclidean_ball(Eigen::Index n, double radius = 1.0, double theta0 = 0.0) {
    if (n < 1) throw std::invalid_argument("euclidean_ball: dimension must be positive");
    if (!(radius > 0.0)) throw std::invalid_argument("euclidean_ball: radius must be positive");
    ProxSetup s;
    s.kind_ = ProxKind::euclidean_ball;
    s.n_ = n;
    s.radius_ = radius;
    // sup of V over the ball is 0.5*(2r)^2 = 2r^2.
    s.theta0_ = theta0 > 0.0 ? theta0 : radius * std::sqrt(2.0);
    return s;
  }

  static ProxSetup euclidean_box(Vector lower, Vector upper, double theta0 = 0.0) {
    if (lower.size() != upper.size() || lower.size() < 1)
      throw std::invalid_argument("euclidean_box: bound vectors must have equal positive size");
    if (((upper - lower).array() <= 0.0).any())
      throw std::invalid_argument("euclidean_box: upper bound must exceed lower bound");
    ProxSetup s;
    s.kind_ = ProxKind::euclidean_box;
    s.n_ = lower.size();
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    // sup of V over the box is 0.5*|u-l|^2.
    s.theta0_ = theta0 > 0.0 ? theta0 : (s.upper_ - s.lower_).norm() / std::sqrt(2.0);
    return s;
  }

  static ProxSetup entropy_simplex(Eigen::Index n, double theta0 = 0.0) {
    if (n < 2) throw std::invalid_argument("entropy_simplex: dimension must be at least 2");
    ProxSetup s;
    s.kind_ = ProxKind::entropy_simplex;
    s.n_ = n;
    // Conventional bound for a start at the barycenter: V(bary, y) <= ln n.
    s.theta0_ = theta0 > 0.0 ? theta0 : std::sqrt(std::log(static_cast<double>(n)));
    return s;
  }

  ProxKind kind() const noexcept { return kind_; }
  Eigen::Index dimension() const noexcept { return n_; }
  double theta0() const noexcept { return theta0_; }
  double radius() const noexcept { return radius_; }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  bool is_feasible(const Vector& x, double tol = kFeasibilityTol) const {
    if (x.size() != n_ || !x.allFinite()) return false;
    switch (kind_) {
      case ProxKind::euclidean_ball:
        return x.norm() <= radius_ + tol;
      case ProxKind::euclidean_box:
        return ((x - lower_).array() >= -tol).all() && ((upper_ - x).array() >= -tol).all();
      case ProxKind::entropy_simplex:
        return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
    }
    return false;
  }

  // Repairs drift within kFeasibilityTol in place; throws std::domain_error on
  // anything larger (that indicates corrupted state, not rounding).
  void reproject(Vector& x) const {
    if (x.size() != n_)
      throw std::domain_error("ProxSetup: point has dimension " + std::to_string(x.size()) +
                              ", setup expects " + std::to_string(n_));
    if (!x.allFinite()) throw std::domain_error("ProxSetup: point has non-finite coordinates");
    switch (kind_) {
      case ProxKind::euclidean_ball: {
        const double nrm = x.norm();
        if (nrm > radius_ + kFeasibilityTol)
          throw std::domain_error("ProxSetup: point outside ball by " + std::to_string(nrm - radius_));
        if (nrm > radius_) x *= radius_ / nrm;
        return;
      }
      case ProxKind::euclidean_box: {
        for (Eigen::Index i = 0; i < n_; ++i) {
          if (x[i] < lower_[i] - kFeasibilityTol || x[i] > upper_[i] + kFeasibilityTol)
            throw std::domain_error("ProxSetup: point outside box at coordinate " + std::to_string(i));
          x[i] = std::clamp(x[i], lower_[i], upper_[i]);
        }
        return;
      }
      case ProxKind::entropy_simplex: {
        if ((x.array() < -kFeasibilityTol).any())
          throw std::domain_error("ProxSetup: negative simplex coordinate beyond tolerance");
        if (std::abs(x.sum() - 1.0) > kFeasibilityTol)
          throw std::domain_error("ProxSetup: simplex coordinates sum to " + std::to_string(x.sum()));
        if ((x.array() < 0.0).any() || x.sum() != 1.0) {
          x = x.cwiseMax(0.0);
          x /= x.sum();
        }
        return;
      }
    }
  }

  // Bregman divergence V(x,y) = d(y) - d(x) - <grad d(x), y - x>.
  double bregman(const Vector& x, const Vector& y) const {
    require_feasible(x, "bregman: first argument");
    require_feasible(y, "bregman: second argument");
    switch (kind_) {
      case ProxKind::euclidean_ball:
      case ProxKind::euclidean_box:
        return 0.5 * (x - y).squaredNorm();
      case ProxKind::entropy_simplex: {
        double v = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
          if (x[i] <= 0.0)
            throw std::domain_error("bregman: entropy setup requires strictly positive first argument");
          if (y[i] > 0.0) v += y[i] * (std::log(y[i]) - std::log(x[i]));
        }
        return std::max(v, 0.0);
      }
    }
    return 0.0;
  }

  Vector mirr(const Vector& x, const Vector& p) const {
    Vector u = x;
    mirr_in_place(u, p);
    return u;
  }

  void mirr_in_place(Vector& x, const Vector& p) const {
    if (p.size() != n_ || !p.allFinite())
      throw std::invalid_argument("mirr: dual step must be finite and match the setup dimension");
    reproject(x);
    switch (kind_) {
      case ProxKind::euclidean_ball: {
        x -= p;
        const double nrm = x.norm();
        if (nrm > radius_) x *= radius_ / nrm;
        return;
      }
      case ProxKind::euclidean_box: {
        for (Eigen::Index i = 0; i < n_; ++i)
          x[i] = std::clamp(x[i] - p[i], lower_[i], upper_[i]);
        return;
      }
      case ProxKind::entropy_simplex: {
        // u_i proportional to x_i * exp(-p_i); shift by the max exponent so
        // the weights stay representable.
        double smax = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n_; ++i) {
          x[i] = std::log(std::max(x[i], kEntropyFloor)) - p[i];
          smax = std::max(smax, x[i]);
        }
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
          x[i] = std::exp(x[i] - smax);
          sum += x[i];
        }
        x /= sum;
        return;
      }
    }
  }

  // Gradient of the distance-generating function (used by optimality checks).
  Vector grad_d(const Vector& x) const {
    switch (kind_) {
      case ProxKind::euclidean_ball:
      case ProxKind::euclidean_box:
        return x;
      case ProxKind::entropy_simplex: {
        Vector g(n_);
        for (Eigen::Index i = 0; i < n_; ++i)
          g[i] = 1.0 + std::log(std::max(x[i], kEntropyFloor));
        return g;
      }
    }
    return x;
  }

  // Random feasible point.  Ball: direction from gaussians, radius from a
  // volume-uniform law.  Box: coordinate-wise uniform.  Simplex: normalized
  // exponentials (Dirichlet(1)), floored away from the boundary so entropy
  // divergences stay finite.
  Vector sample(RngStream& rng) const {
    Vector x(n_);
    switch (kind_) {
      case ProxKind::euclidean_ball: {
        for (Eigen::Index i = 0; i < n_; ++i) x[i] = rng.gaussian();
        const double nrm = x.norm();
        const double r = radius_ * std::pow(rng.uniform(), 1.0 / static_cast<double>(n_));
        x *= (nrm > 0.0 ? r / nrm : 0.0);
        return x;
      }
      case ProxKind::euclidean_box: {
        for (Eigen::Index i = 0; i < n_; ++i)
          x[i] = lower_[i] + (upper_[i] - lower_[i]) * rng.uniform();
        return x;
      }
      case ProxKind::entropy_simplex: {
        for (Eigen::Index i = 0; i < n_; ++i)
          x[i] = std::max(rng.exponential(), 1e-12);
        x /= x.sum();
        return x;
      }
    }
    return x;
  }

  Vector default_start() const {
    switch (kind_) {
      case ProxKind::euclidean_ball:
        return Vector::Constant(n_, radius_ / std::sqrt(static_cast<double>(n_)));
      case ProxKind::euclidean_box:
        return 0.5 * (lower_ + upper_);
      case ProxKind::entropy_simplex:
        return Vector::Constant(n_, 1.0 / static_cast<double>(n_));
    }
    return Vector::Zero(n_);
  }

  // Empirical check that theta0^2 dominates V over Q: sample pairs, track the
  // max divergence.  A fail means the configured theta0 underestimates the
  // prox diameter (the convergence bound would be silently wrong).
  Theta0Report check_theta0(int samples, RngStream& rng) const {
    Theta0Report rep;
    rep.samples = samples;
    rep.theta0_squared = theta0_ * theta0_;
    for (int s = 0; s < samples; ++s) {
      const Vector a = sample(rng);
      const Vector b = sample(rng);
      rep.max_bregman = std::max(rep.max_bregman, bregman(a, b));
    }
    rep.pass = rep.max_bregman <= rep.theta0_squared;
    return rep;
  }

private:
  ProxSetup() = default;

  void require_feasible(const Vector& x, const char* what) const {
    if (!is_feasible(x))
      throw std::domain_error(std::string(what) + ": point is not feasible for " +
                              to_string(kind_) + " setup");
  }

  ProxKind kind_ = ProxKind::euclidean_ball;
  Eigen::Index n_ = 0;
  double theta0_ = 0.0;
  double radius_ = 1.0;
  Vector lower_, upper_;
};

} // namespace smd
