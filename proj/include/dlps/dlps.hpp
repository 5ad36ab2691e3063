#pragma once

#include <exception>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dlps/smooth.hpp"

namespace dlps {

enum class BundleKind { Identity, Product, General };

/// Fiber bundle phi: E -> M in global coordinates.
///
/// Product bundles have phi(eps) = eps.head(base_dim); their remaining coordinates are fiber
/// coordinates. Identity bundles are E = M with phi = id.
struct FiberBundleModel {
  int total_dim = 0;
  int base_dim = 0;
  BundleKind kind = BundleKind::General;
  SmoothMap phi;
  SmoothMap section;  // phi o section = id

  int fiber_dim() const { return total_dim - base_dim; }
  /// A point over m "like" eps: m itself for id-bundles, (m, fiber(eps)) for products, eps otherwise.
  Vector transport(const Vector& eps, const Vector& m) const;

  static FiberBundleModel identity(int n);
  static FiberBundleModel product(int base_dim, int fiber_dim);
  /// Validates phi o section = id at a few deterministic base points.
  static FiberBundleModel general(int total_dim, int base_dim, SmoothMap phi, SmoothMap section);
};

/// Pair of consecutive C'(E) points (x0, x1) = ((eps0, m1), (eps1, m2)) with phi(eps1) = m1.
using C2Point = std::pair<Vector, Vector>;
using C2Sampler = std::function<C2Point(Rng&)>;

/// Matrix of the linear map IVCM(x0, x1): T_{eps1}E -> ker dphi(eps0).
using IvcmFn = std::function<Matrix(const Vector& x0, const Vector& x1)>;

/// Discrete Lagrange-Poincare system (E, L_d, IVCM). Points of C'(E) = E x M are stored as one
/// vector x = (eps, m) of length total_dim + base_dim.
class DlpsSystem {
 public:
  DlpsSystem(FiberBundleModel bundle, SmoothMap lagrangian, IvcmFn ivcm = nullptr, C2Sampler sampler = nullptr);

  const FiberBundleModel& bundle() const { return bundle_; }
  const SmoothMap& lagrangian() const { return lagrangian_; }
  int e() const { return bundle_.total_dim; }
  int m() const { return bundle_.base_dim; }
  int c1_dim() const { return e() + m(); }
  bool ivcm_is_zero() const { return !ivcm_; }
  bool is_dms() const { return bundle_.kind == BundleKind::Identity && ivcm_is_zero(); }

  Vector eps(const Vector& x) const { return x.head(e()); }
  Vector base(const Vector& x) const { return x.tail(m()); }
  Vector point(const Vector& eps, const Vector& m) const;

  double lagrangian_value(const Vector& x) const { return lagrangian_(x)(0); }
  Vector lagrangian_gradient(const Vector& x) const { return gradient(lagrangian_, x); }

  Matrix ivcm_matrix(const Vector& x0, const Vector& x1) const;
  Vector ivcm(const Vector& x0, const Vector& x1, const Vector& d_eps1) const;

  bool has_sampler() const { return static_cast<bool>(sampler_); }
  const C2Sampler& sampler() const { return sampler_; }
  /// Consecutive-pair sample from the system's domain sampler.
  C2Point sample_c2(Rng& rng) const;
  Vector sample_c1(Rng& rng) const { return sample_c2(rng).first; }

  DlpsSystem with_lagrangian(SmoothMap lagrangian) const;
  DlpsSystem with_sampler(C2Sampler sampler) const;

 private:
  FiberBundleModel bundle_;
  SmoothMap lagrangian_;
  IvcmFn ivcm_;
  C2Sampler sampler_;
};

/// Sequence of C'(E) points x_k = (eps_k, m_{k+1}), k = 0..N-1.
class DiscretePath {
 public:
  DiscretePath(int total_dim, int base_dim) : total_dim_(total_dim), base_dim_(base_dim) {}

  int total_dim() const { return total_dim_; }
  int base_dim() const { return base_dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vector& operator[](std::size_t k) const { return points_.at(k); }
  const Vector& back() const { return points_.back(); }
  const std::vector<Vector>& points() const { return points_; }

  Vector eps(std::size_t k) const { return points_.at(k).head(total_dim_); }
  /// m_{k+1}
  Vector base(std::size_t k) const { return points_.at(k).tail(base_dim_); }

  void push_back(const Vector& x);
  /// max_k |phi(eps_{k+1}) - m_{k+1}|
  double compatibility_violation(const FiberBundleModel& bundle) const;

 private:
  int total_dim_;
  int base_dim_;
  std::vector<Vector> points_;
};

/// deltas[k] = (d eps_k, d m_{k+1}).
struct Variation {
  std::vector<Vector> deltas;
};

double action_sum(const DlpsSystem& sys, const DiscretePath& path);

/// Equations-of-motion covector on E for the consecutive pairs (eps_prev, m_cur), (eps_cur, m_next).
Vector del_residual(const DlpsSystem& sys, const Vector& eps_prev, const Vector& m_cur, const Vector& eps_cur,
                    const Vector& m_next);
Vector del_residual(const DlpsSystem& sys, const Vector& x_prev, const Vector& x_cur);
/// Residual inf-norm for every consecutive triple; entry k-1 belongs to the pair (x_{k-1}, x_k).
std::vector<double> path_residuals(const DlpsSystem& sys, const DiscretePath& path);

struct StepDiagnostics {
  int iterations = 0;
  double residual_norm = 0.0;
  Eigen::Index jacobian_rank = 0;
  Eigen::Index unknowns = 0;
};

struct StepResult {
  Vector eps1;
  Vector m2;
  StepDiagnostics diagnostics;
};

/// One step of the discrete flow: solves for (eps1, m2) given (eps0, m1).
StepResult step(const DlpsSystem& sys, const Vector& eps0, const Vector& m1,
                const std::optional<std::pair<Vector, Vector>>& guess = std::nullopt, const NewtonConfig& cfg = {});

struct SimulationResult {
  DiscretePath path;
  std::vector<StepDiagnostics> diagnostics;
  std::exception_ptr error;  // set when a step failed; path holds the pairs computed before it
  int failed_step = -1;

  bool ok() const { return !error; }
  /// Rethrows the step error, if any.
  const DiscretePath& value() const;
};

SimulationResult simulate(const DlpsSystem& sys, const Vector& eps0, const Vector& m1, int n_steps,
                          const NewtonConfig& cfg = {});

/// DMS (Q, L_d) as a DLPS: E = M = Q, phi = id, IVCM = 0.
DlpsSystem from_dms(int config_dim, const SmoothMap& lagrangian, C2Sampler sampler = nullptr);

/// Fixed-endpoint variation from free variations tilde_deltas[k-1] = d~eps_k, k = 1..N-1.
Variation build_fixed_endpoint_variation(const DlpsSystem& sys, const DiscretePath& path,
                                         const std::vector<Vector>& tilde_deltas);

/// Central FD derivative of the action sum along a variation.
double action_derivative(const DlpsSystem& sys, const DiscretePath& path, const Variation& variation);

struct IvcmReport {
  double linearity_violation = 0.0;
  double kernel_violation = 0.0;  // |dphi(eps0) IVCM(...)|
};
IvcmReport check_ivcm(const DlpsSystem& sys, int n_samples, Rng& rng);

}  // namespace dlps
