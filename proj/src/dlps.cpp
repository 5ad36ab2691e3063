#include "dlps/dlps.hpp"

#include <stdexcept>
#include <string>

namespace dlps {

Vector FiberBundleModel::transport(const Vector& eps, const Vector& m) const {
  switch (kind) {
    case BundleKind::Identity:
      return m;
    case BundleKind::Product:
      return join(m, eps.tail(fiber_dim()));
    case BundleKind::General:
      break;
  }
  return eps;
}

FiberBundleModel FiberBundleModel::identity(int n) {
  return {n, n, BundleKind::Identity, identity_map(n), identity_map(n)};
}

FiberBundleModel FiberBundleModel::product(int base_dim, int fiber_dim) {
  const int n = base_dim + fiber_dim;
  const Matrix P = Matrix::Identity(base_dim, n);
  return {n, base_dim, BundleKind::Product, linear_map(P), linear_map(P.transpose())};
}

FiberBundleModel FiberBundleModel::general(int total_dim, int base_dim, SmoothMap phi, SmoothMap section) {
  if (phi.in_dim() != total_dim || phi.out_dim() != base_dim || section.in_dim() != base_dim ||
      section.out_dim() != total_dim) {
    throw std::invalid_argument("FiberBundleModel: phi/section dimensions do not match");
  }
  for (double t : {0.7, 1.3, 2.1}) {
    Vector m(base_dim);
    for (int i = 0; i < base_dim; ++i) m(i) = t * (1.0 + 0.1 * i);
    const double v = inf_norm(Vector(phi(section(m)) - m));
    if (v > 1e-10) throw ValidationError("phi o section = id", v, m);
  }
  return {total_dim, base_dim, BundleKind::General, std::move(phi), std::move(section)};
}

DlpsSystem::DlpsSystem(FiberBundleModel bundle, SmoothMap lagrangian, IvcmFn ivcm, C2Sampler sampler)
    : bundle_(std::move(bundle)), lagrangian_(std::move(lagrangian)), ivcm_(std::move(ivcm)), sampler_(std::move(sampler)) {
  if (lagrangian_.in_dim() != c1_dim() || lagrangian_.out_dim() != 1) {
    throw std::invalid_argument("DlpsSystem: Lagrangian must map R^(total+base) -> R");
  }
}

Vector DlpsSystem::point(const Vector& eps, const Vector& m) const {
  if (eps.size() != e() || m.size() != this->m()) throw std::invalid_argument("DlpsSystem::point: wrong dimension");
  return join(eps, m);
}

Matrix DlpsSystem::ivcm_matrix(const Vector& x0, const Vector& x1) const {
  if (!ivcm_) return Matrix::Zero(e(), e());
  Matrix D = ivcm_(x0, x1);
  if (D.rows() != e() || D.cols() != e()) throw std::invalid_argument("DlpsSystem: IVCM matrix has wrong shape");
  return D;
}

Vector DlpsSystem::ivcm(const Vector& x0, const Vector& x1, const Vector& d_eps1) const {
  return ivcm_matrix(x0, x1) * d_eps1;
}

C2Point DlpsSystem::sample_c2(Rng& rng) const {
  if (!sampler_) throw std::logic_error("DlpsSystem: no domain sampler attached");
  return sampler_(rng);
}

DlpsSystem DlpsSystem::with_lagrangian(SmoothMap lagrangian) const {
  return DlpsSystem(bundle_, std::move(lagrangian), ivcm_, sampler_);
}

DlpsSystem DlpsSystem::with_sampler(C2Sampler sampler) const {
  return DlpsSystem(bundle_, lagrangian_, ivcm_, std::move(sampler));
}

void DiscretePath::push_back(const Vector& x) {
  if (x.size() != total_dim_ + base_dim_) throw std::invalid_argument("DiscretePath: point has wrong dimension");
  points_.push_back(x);
}

double DiscretePath::compatibility_violation(const FiberBundleModel& bundle) const {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
    worst = std::max(worst, inf_norm(Vector(bundle.phi(eps(k + 1)) - base(k))));
  }
  return worst;
}

const DiscretePath& SimulationResult::value() const {
  if (error) std::rethrow_exception(error);
  return path;
}

double action_sum(const DlpsSystem& sys, const DiscretePath& path) {
  double s = 0.0;
  for (const Vector& x : path.points()) s += sys.lagrangian_value(x);
  return s;
}

Vector del_residual(const DlpsSystem& sys, const Vector& x_prev, const Vector& x_cur) {
  const int e = sys.e(), m = sys.m();
  const Vector g_prev = sys.lagrangian_gradient(x_prev);
  const Vector g_cur = sys.lagrangian_gradient(x_cur);
  Vector res = g_cur.head(e);
  res += sys.bundle().phi.jacobian(x_cur.head(e)).transpose() * g_prev.tail(m);
  if (!sys.ivcm_is_zero()) res += sys.ivcm_matrix(x_prev, x_cur).transpose() * g_prev.head(e);
  return res;
}

Vector del_residual(const DlpsSystem& sys, const Vector& eps_prev, const Vector& m_cur, const Vector& eps_cur,
                    const Vector& m_next) {
  return del_residual(sys, sys.point(eps_prev, m_cur), sys.point(eps_cur, m_next));
}

std::vector<double> path_residuals(const DlpsSystem& sys, const DiscretePath& path) {
  std::vector<double> out;
  for (std::size_t k = 1; k < path.size(); ++k) out.push_back(inf_norm(del_residual(sys, path[k - 1], path[k])));
  return out;
}

StepResult step(const DlpsSystem& sys, const Vector& eps0, const Vector& m1,
                const std::optional<std::pair<Vector, Vector>>& guess, const NewtonConfig& cfg) {
  const FiberBundleModel& B = sys.bundle();
  const int e = sys.e(), m = sys.m();
  if (eps0.size() != e || m1.size() != m) throw std::invalid_argument("step: wrong dimension");
  const Vector x0 = sys.point(eps0, m1);

  Vector eps1_guess = B.transport(eps0, m1);
  Vector m2_guess = m1 + (m1 - B.phi(eps0));
  if (guess) {
    eps1_guess = guess->first;
    m2_guess = guess->second;
  }

  // Unknown u and its decoding into (eps1, m2).
  std::function<std::pair<Vector, Vector>(const Vector&)> decode;
  Vector u0;
  int n_res = e;
  switch (B.kind) {
    case BundleKind::Identity:
      decode = [m1](const Vector& u) { return std::make_pair(Vector(m1), Vector(u)); };
      u0 = m2_guess;
      break;
    case BundleKind::Product: {
      const int f = B.fiber_dim();
      decode = [m1, f, m](const Vector& u) { return std::make_pair(join(m1, u.head(f)), Vector(u.tail(m))); };
      u0 = join(eps1_guess.tail(f), m2_guess);
      break;
    }
    case BundleKind::General:
      decode = [e, m](const Vector& u) { return std::make_pair(Vector(u.head(e)), Vector(u.tail(m))); };
      u0 = join(eps1_guess, m2_guess);
      n_res = e + m;
      break;
  }

  const SmoothMap residual(static_cast<int>(u0.size()), n_res, [&](const Vector& u) {
    const auto [eps1, m2] = decode(u);
    Vector r = del_residual(sys, x0, sys.point(eps1, m2));
    if (B.kind == BundleKind::General) r = join(r, Vector(B.phi(eps1) - m1));
    return r;
  });

  const NewtonResult nr = newton_solve(residual, u0, cfg);
  Eigen::FullPivLU<Matrix> lu(jacobian_fd(residual, nr.x, cfg.fd_step));
  lu.setThreshold(kRankThreshold);
  if (!lu.isInvertible()) {
    throw SingularJacobian("step: residual Jacobian rank " + std::to_string(lu.rank()) + " < " +
                           std::to_string(u0.size()) + " at the solution");
  }
  const auto [eps1, m2] = decode(nr.x);
  return {eps1, m2, {nr.iterations, nr.residual_norm, lu.rank(), u0.size()}};
}

SimulationResult simulate(const DlpsSystem& sys, const Vector& eps0, const Vector& m1, int n_steps,
                          const NewtonConfig& cfg) {
  if (n_steps < 0) throw std::invalid_argument("simulate: n_steps must be non-negative");
  SimulationResult out{DiscretePath(sys.e(), sys.m()), {}, nullptr, -1};
  out.path.push_back(sys.point(eps0, m1));
  for (int k = 1; k <= n_steps; ++k) {
    try {
      const StepResult s = step(sys, out.path.eps(k - 1), out.path.base(k - 1), std::nullopt, cfg);
      out.path.push_back(sys.point(s.eps1, s.m2));
      out.diagnostics.push_back(s.diagnostics);
    } catch (...) {
      out.error = std::current_exception();
      out.failed_step = k;
      break;
    }
  }
  return out;
}

DlpsSystem from_dms(int config_dim, const SmoothMap& lagrangian, C2Sampler sampler) {
  if (lagrangian.in_dim() != 2 * config_dim) throw std::invalid_argument("from_dms: Lagrangian must live on Q x Q");
  return DlpsSystem(FiberBundleModel::identity(config_dim), lagrangian, nullptr, std::move(sampler));
}

Variation build_fixed_endpoint_variation(const DlpsSystem& sys, const DiscretePath& path,
                                         const std::vector<Vector>& tilde_deltas) {
  const std::size_t N = path.size();
  if (N < 2) throw std::invalid_argument("build_fixed_endpoint_variation: path needs at least two pairs");
  if (tilde_deltas.size() != N - 1) throw std::invalid_argument("build_fixed_endpoint_variation: need N-1 variations");
  const int e = sys.e(), m = sys.m();
  auto tilde = [&](std::size_t k) -> const Vector& { return tilde_deltas.at(k - 1); };

  std::vector<Vector> d_eps(N);
  d_eps[N - 1] = tilde(N - 1);
  for (std::size_t k = N - 2; k >= 1; --k) d_eps[k] = tilde(k) + sys.ivcm(path[k], path[k + 1], tilde(k + 1));
  d_eps[0] = sys.ivcm(path[0], path[1], tilde(1));

  Variation var;
  for (std::size_t k = 0; k < N; ++k) {
    if (d_eps[k].size() != e) throw std::invalid_argument("build_fixed_endpoint_variation: variation has wrong size");
    const Vector d_m_next = (k + 1 < N) ? Vector(sys.bundle().phi.jacobian(path.eps(k + 1)) * d_eps[k + 1])
                                        : Vector(Vector::Zero(m));
    var.deltas.push_back(join(d_eps[k], d_m_next));
  }
  return var;
}

double action_derivative(const DlpsSystem& sys, const DiscretePath& path, const Variation& variation) {
  if (variation.deltas.size() != path.size()) throw std::invalid_argument("action_derivative: size mismatch");
  double path_scale = 0.0, delta_scale = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    path_scale = std::max(path_scale, inf_norm(path[k]));
    delta_scale = std::max(delta_scale, inf_norm(variation.deltas[k]));
  }
  if (delta_scale == 0.0) return 0.0;
  const double t = central_step() * (1.0 + path_scale) / delta_scale;
  auto S = [&](double s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) acc += sys.lagrangian_value(path[k] + s * variation.deltas[k]);
    return acc;
  };
  return (S(t) - S(-t)) / (2.0 * t);
}

IvcmReport check_ivcm(const DlpsSystem& sys, int n_samples, Rng& rng) {
  IvcmReport rep;
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int i = 0; i < n_samples; ++i) {
    const auto [x0, x1] = sys.sample_c2(rng);
    const Vector xi = random_normal(rng, sys.e()), eta = random_normal(rng, sys.e());
    const double a = coef(rng), b = coef(rng);
    const Vector lhs = sys.ivcm(x0, x1, a * xi + b * eta);
    const Vector rhs = a * sys.ivcm(x0, x1, xi) + b * sys.ivcm(x0, x1, eta);
    rep.linearity_violation = std::max(rep.linearity_violation, inf_norm(Vector(lhs - rhs)));
    const Matrix dphi = sys.bundle().phi.jacobian(sys.eps(x0));
    rep.kernel_violation = std::max(rep.kernel_violation, inf_norm(Vector(dphi * sys.ivcm(x0, x1, xi))));
  }
  return rep;
}

}  // namespace dlps
