#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "dlps/errors.hpp"

namespace dlps {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

using EvalFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Relative step for central first differences.
inline double central_step() { return std::cbrt(kEps); }
/// Relative step for the fourth-order first-derivative stencil.
inline double fourth_order_step() { return std::pow(kEps, 0.2); }
/// Relative step for direct second differences.
inline double second_difference_step() { return std::pow(kEps, 0.25); }

/// Evaluatable map R^in -> R^out with optional analytic Jacobian.
class SmoothMap {
 public:
  SmoothMap() = default;
  SmoothMap(int in_dim, int out_dim, EvalFn eval, JacobianFn jac = nullptr);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  bool has_jacobian() const { return static_cast<bool>(jac_); }
  bool valid() const { return static_cast<bool>(eval_); }

  Vector operator()(const Vector& x) const;
  /// Analytic Jacobian when supplied, fourth-order central differences otherwise.
  Matrix jacobian(const Vector& x) const;

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  EvalFn eval_;
  JacobianFn jac_;
};

SmoothMap identity_map(int n);
/// x -> A x + b
SmoothMap affine_map(const Matrix& A, const Vector& b);
SmoothMap linear_map(const Matrix& A);
/// outer o inner, Jacobian by the chain rule.
SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner);

Matrix jacobian_fd(const SmoothMap& f, const Vector& x, double rel_step = central_step());
Matrix jacobian_fd(const EvalFn& f, const Vector& x, double rel_step = central_step());
/// Five-point stencil, step fourth_order_step() * (1 + |x_i|).
Matrix jacobian_fd4(const EvalFn& f, const Vector& x);

/// Gradient of a scalar map (out_dim == 1).
Vector gradient(const SmoothMap& f, const Vector& x);
/// Hessian of a scalar map: FD of the analytic gradient if present, second differences otherwise.
Matrix hessian(const SmoothMap& f, const Vector& x);

struct NewtonConfig {
  double residual_tol = 1e-12;
  int max_iters = 50;
  double fd_step = central_step();  // relative, scaled by 1+|x_i|
  bool backtracking = true;
  int max_halvings = 20;

  void validate() const;
};

struct NewtonResult {
  Vector x;
  int iterations = 0;
  double residual_norm = 0.0;
  Eigen::Index jacobian_rank = -1;  // rank of the last Jacobian factored, -1 if none
};

/// Damped Newton iteration on a square system; the result always satisfies the residual bound.
NewtonResult newton_solve(const SmoothMap& residual, const Vector& x0, const NewtonConfig& cfg = {});

/// Relative rank threshold used for square solves.
inline constexpr double kRankThreshold = 1e-10;

inline double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }
inline double inf_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.lpNorm<Eigen::Infinity>(); }

/// Concatenate two vectors.
Vector join(const Vector& a, const Vector& b);
Vector join(const Vector& a, const Vector& b, const Vector& c);

/// Vector of independent standard normal draws.
Vector random_normal(Rng& rng, int n, double sigma = 1.0);

}  // namespace dlps
