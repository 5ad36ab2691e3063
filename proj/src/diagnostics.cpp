#include "dlps/diagnostics.hpp"

#include <stdexcept>
#include <string>

namespace dlps {

namespace {

constexpr double kRegularityRcond = 1e-8;

double rcond(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const Vector& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  return s(0) == 0.0 ? 0.0 : s(s.size() - 1) / s(0);
}

void require_dms(const DlpsSystem& dms, const char* who) {
  if (dms.bundle().kind != BundleKind::Identity || !dms.ivcm_is_zero()) {
    throw std::invalid_argument(std::string(who) + ": system is not a DMS");
  }
}

// Mixed partial D1D2 L_d with rows indexing q0 and columns q1.
Matrix mixed_partial(const DlpsSystem& dms, const Vector& x) {
  const int n = dms.e();
  return hessian(dms.lagrangian(), x).topRightCorner(n, n);
}

Matrix regular_mixed_partial(const DlpsSystem& dms, const Vector& x, double* rc = nullptr) {
  const Matrix D12 = mixed_partial(dms, x);
  const double r = rcond(D12);
  if (rc) *rc = r;
  if (r < kRegularityRcond) {
    throw RegularityError("mixed partial D1D2 L_d is singular (rcond " + std::to_string(r) + ")");
  }
  return D12;
}

Matrix canonical_form(int n) {
  Matrix omega = Matrix::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Matrix::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return omega;
}

}  // namespace

MomentumValue momentum(const DlpsSystem& sys, const ActionModel& action_E, const Vector& eps0, const Vector& m1) {
  if (action_E.space_dim != sys.e()) throw std::invalid_argument("momentum: action does not act on E");
  const Vector d1 = sys.lagrangian_gradient(sys.point(eps0, m1)).head(sys.e());
  return {Vector(-generator_matrix(action_E, eps0).transpose() * d1)};
}

MomentumReport momentum_evolution_check(const DlpsSystem& sys, const ActionModel& action_E,
                                        const DiscretePath& trajectory, double residual_tol) {
  MomentumReport rep;
  for (double r : path_residuals(sys, trajectory)) rep.max_residual = std::max(rep.max_residual, r);
  rep.precondition_ok = rep.max_residual <= residual_tol;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    rep.series.push_back(momentum(sys, action_E, trajectory.eps(k), trajectory.base(k)).components);
  }
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    Vector predicted = rep.series[k - 1];
    if (!sys.ivcm_is_zero()) {
      const Vector d1_prev = sys.lagrangian_gradient(trajectory[k - 1]).head(sys.e());
      const Matrix xi = generator_matrix(action_E, trajectory.eps(k));
      predicted += (d1_prev.transpose() * sys.ivcm_matrix(trajectory[k - 1], trajectory[k]) * xi).transpose();
    }
    rep.max_violation = std::max(rep.max_violation, inf_norm(Vector(rep.series[k] - predicted)));
    rep.max_drift = std::max(rep.max_drift, inf_norm(Vector(rep.series[k] - rep.series[0])));
  }
  return rep;
}

Vector legendre_flow(const DlpsSystem& dms, const Vector& qp, const Vector& guess) {
  const int n = dms.e();
  const Vector q = qp.head(n), p = qp.tail(n);
  Vector q1 = guess;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30; ++it) {
    const Vector x = join(q, q1);
    const Vector r = -dms.lagrangian_gradient(x).head(n) - p;
    const Matrix D12 = regular_mixed_partial(dms, x);
    const Vector dq = D12.fullPivLu().solve(r);  // r' = -D12, so q1 <- q1 - (-D12)^-1 r
    q1 += dq;
    const double s = inf_norm(dq);
    if (s <= 4 * kEps * (1.0 + inf_norm(q1)) || s >= last_step) break;
    last_step = s;
  }
  return join(q1, Vector(dms.lagrangian_gradient(join(q, q1)).tail(n)));
}

SymplecticReport symplectic_check(const DlpsSystem& dms, const DiscretePath& trajectory) {
  require_dms(dms, "symplectic_check");
  SymplecticReport rep;
  rep.min_rcond = 1.0;
  const int n = dms.e();
  const Matrix omega = canonical_form(n);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const Vector& x = trajectory[k];
    double rc = 0.0;
    regular_mixed_partial(dms, x, &rc);
    rep.min_rcond = std::min(rep.min_rcond, rc);
    const Vector q1 = x.tail(n);
    const Vector qp = join(Vector(x.head(n)), Vector(-dms.lagrangian_gradient(x).head(n)));
    const Matrix K = jacobian_fd([&](const Vector& z) { return legendre_flow(dms, z, q1); }, qp);
    const double v = inf_norm(Matrix(K.transpose() * omega * K - omega));
    rep.per_step.push_back(v);
    rep.max_violation = std::max(rep.max_violation, v);
  }
  return rep;
}

Matrix pulled_back_brackets(const ReducedModel& model, const DlpsSystem& dms, const std::vector<SmoothMap>& test_fns,
                            const Vector& x) {
  require_dms(dms, "pulled_back_brackets");
  const int n = dms.e();
  const Matrix H = hessian(dms.lagrangian(), x);
  regular_mixed_partial(dms, x);
  // D Lambda for (q0, q1) -> (q0, p0 = -D1 L_d).
  Matrix DL = Matrix::Zero(2 * n, 2 * n);
  DL.topLeftCorner(n, n) = Matrix::Identity(n, n);
  DL.bottomLeftCorner(n, n) = -H.topLeftCorner(n, n);
  DL.bottomRightCorner(n, n) = -H.topRightCorner(n, n);
  const Eigen::FullPivLU<Matrix> lu(DL);
  const Matrix DLinv = lu.inverse();
  const Matrix B = DLinv * canonical_form(n) * DLinv.transpose();

  const Vector y = model.upsilon(x);
  const Matrix Dy = model.upsilon.jacobian(x);
  const int k = static_cast<int>(test_fns.size());
  Matrix grads(2 * n, k);
  for (int i = 0; i < k; ++i) grads.col(i) = Dy.transpose() * gradient(test_fns[i], y);
  return grads.transpose() * B * grads;
}

std::vector<SmoothMap> coordinate_functions(int dim) {
  std::vector<SmoothMap> out;
  for (int i = 0; i < dim; ++i) {
    Matrix row = Matrix::Zero(1, dim);
    row(0, i) = 1.0;
    out.push_back(linear_map(row));
  }
  return out;
}

PoissonReport poisson_descent_check(const ReducedModel& model, const DlpsSystem& dms,
                                    const std::vector<SmoothMap>& test_fns, const std::vector<Vector>& samples,
                                    Rng& rng, int group_draws) {
  PoissonReport rep;
  for (const Vector& x : samples) {
    const Matrix base = pulled_back_brackets(model, dms, test_fns, x);
    rep.max_bracket = std::max(rep.max_bracket, inf_norm(base));
    for (int j = 0; j < group_draws; ++j) {
      const Vector gx = model.group_action.act(model.group().random(rng), x);
      const Matrix moved = pulled_back_brackets(model, dms, test_fns, gx);
      rep.max_variation = std::max(rep.max_variation, inf_norm(Matrix(moved - base)));
    }
    ++rep.samples;
  }
  return rep;
}

}  // namespace dlps
