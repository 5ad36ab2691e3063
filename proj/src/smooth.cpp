#include "dlps/smooth.hpp"

#include <string>
#include <utility>

namespace dlps {

namespace {

void check_dim(const char* what, Eigen::Index got, int expected) {
  if (got != expected) {
    throw std::invalid_argument(std::string(what) + ": expected dimension " + std::to_string(expected) +
                                ", got " + std::to_string(got));
  }
}

}  // namespace

SmoothMap::SmoothMap(int in_dim, int out_dim, EvalFn eval, JacobianFn jac)
    : in_dim_(in_dim), out_dim_(out_dim), eval_(std::move(eval)), jac_(std::move(jac)) {
  if (in_dim < 0 || out_dim < 0) throw std::invalid_argument("SmoothMap: negative dimension");
  if (!eval_) throw std::invalid_argument("SmoothMap: missing eval");
}

Vector SmoothMap::operator()(const Vector& x) const {
  check_dim("SmoothMap input", x.size(), in_dim_);
  Vector y = eval_(x);
  check_dim("SmoothMap output", y.size(), out_dim_);
  return y;
}

Matrix SmoothMap::jacobian(const Vector& x) const {
  if (!jac_) {
    check_dim("SmoothMap input", x.size(), in_dim_);
    return jacobian_fd4(eval_, x);
  }
  check_dim("SmoothMap input", x.size(), in_dim_);
  Matrix J = jac_(x);
  if (J.rows() != out_dim_ || J.cols() != in_dim_) {
    throw std::invalid_argument("SmoothMap: analytic Jacobian has wrong shape");
  }
  return J;
}

SmoothMap identity_map(int n) {
  return SmoothMap(
      n, n, [](const Vector& x) { return x; }, [n](const Vector&) { return Matrix(Matrix::Identity(n, n)); });
}

SmoothMap affine_map(const Matrix& A, const Vector& b) {
  check_dim("affine_map offset", b.size(), static_cast<int>(A.rows()));
  return SmoothMap(
      static_cast<int>(A.cols()), static_cast<int>(A.rows()), [A, b](const Vector& x) { return Vector(A * x + b); },
      [A](const Vector&) { return A; });
}

SmoothMap linear_map(const Matrix& A) { return affine_map(A, Vector::Zero(A.rows())); }

SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner) {
  if (outer.in_dim() != inner.out_dim()) throw std::invalid_argument("compose: dimension mismatch");
  return SmoothMap(
      inner.in_dim(), outer.out_dim(), [outer, inner](const Vector& x) { return outer(inner(x)); },
      [outer, inner](const Vector& x) { return Matrix(outer.jacobian(inner(x)) * inner.jacobian(x)); });
}

Matrix jacobian_fd(const EvalFn& f, const Vector& x, double rel_step) {
  const Eigen::Index n = x.size();
  Matrix J;
  Vector xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = rel_step * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    const Vector fp = f(xp);
    xp(i) = x(i) - h;
    const Vector fm = f(xp);
    xp(i) = x(i);
    if (i == 0) J.resize(fp.size(), n);
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  if (n == 0) J.resize(f(x).size(), 0);
  return J;
}

Matrix jacobian_fd4(const EvalFn& f, const Vector& x) {
  const Eigen::Index n = x.size();
  Matrix J;
  Vector xp = x;
  auto at = [&](Eigen::Index i, double offset) {
    xp(i) = x(i) + offset;
    Vector v = f(xp);
    xp(i) = x(i);
    return v;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = fourth_order_step() * (1.0 + std::abs(x(i)));
    const Vector d = 8.0 * (at(i, h) - at(i, -h)) - (at(i, 2 * h) - at(i, -2 * h));
    if (i == 0) J.resize(d.size(), n);
    J.col(i) = d / (12.0 * h);
  }
  if (n == 0) J.resize(f(x).size(), 0);
  return J;
}

Matrix jacobian_fd(const SmoothMap& f, const Vector& x, double rel_step) {
  check_dim("jacobian_fd input", x.size(), f.in_dim());
  return jacobian_fd([&f](const Vector& v) { return f(v); }, x, rel_step);
}

Vector gradient(const SmoothMap& f, const Vector& x) {
  if (f.out_dim() != 1) throw std::invalid_argument("gradient: map is not scalar");
  return f.jacobian(x).row(0).transpose();
}

Matrix hessian(const SmoothMap& f, const Vector& x) {
  if (f.out_dim() != 1) throw std::invalid_argument("hessian: map is not scalar");
  const Eigen::Index n = x.size();
  Matrix H(n, n);
  if (f.has_jacobian()) {
    H = jacobian_fd([&f](const Vector& v) { return gradient(f, v); }, x);
  } else {
    Vector xp = x;
    const double f0 = f(x)(0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double hi = second_difference_step() * (1.0 + std::abs(x(i)));
      for (Eigen::Index j = i; j < n; ++j) {
        const double hj = second_difference_step() * (1.0 + std::abs(x(j)));
        if (i == j) {
          xp(i) = x(i) + hi;
          const double fp = f(xp)(0);
          xp(i) = x(i) - hi;
          const double fm = f(xp)(0);
          xp(i) = x(i);
          H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        } else {
          auto eval = [&](double si, double sj) {
            xp(i) = x(i) + si * hi;
            xp(j) = x(j) + sj * hj;
            const double v = f(xp)(0);
            xp(i) = x(i);
            xp(j) = x(j);
            return v;
          };
          H(i, j) = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * hi * hj);
          H(j, i) = H(i, j);
        }
      }
    }
  }
  return 0.5 * (H + H.transpose());
}

void NewtonConfig::validate() const {
  if (!(residual_tol > 0.0)) throw std::invalid_argument("NewtonConfig: residual_tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("NewtonConfig: max_iters must be at least 1");
  if (!(fd_step > 0.0)) throw std::invalid_argument("NewtonConfig: fd_step must be positive");
  if (max_halvings < 0) throw std::invalid_argument("NewtonConfig: max_halvings must be non-negative");
}

NewtonResult newton_solve(const SmoothMap& residual, const Vector& x0, const NewtonConfig& cfg) {
  cfg.validate();
  if (residual.in_dim() != residual.out_dim()) throw std::invalid_argument("newton_solve: residual is not square");
  check_dim("newton_solve initial guess", x0.size(), residual.in_dim());

  NewtonResult out;
  out.x = x0;
  Vector r = residual(out.x);
  out.residual_norm = inf_norm(r);

  for (int it = 0; it < cfg.max_iters; ++it) {
    if (out.residual_norm <= cfg.residual_tol) return out;

    const Matrix J = residual.has_jacobian() ? residual.jacobian(out.x)
                                             : jacobian_fd(residual, out.x, cfg.fd_step);
    Eigen::FullPivLU<Matrix> lu(J);
    lu.setThreshold(kRankThreshold);
    out.jacobian_rank = lu.rank();
    if (!lu.isInvertible()) {
      throw SingularJacobian("newton_solve: Jacobian rank " + std::to_string(lu.rank()) + " < " +
                             std::to_string(J.rows()));
    }
    const Vector dx = -lu.solve(r);

    double t = 1.0;
    bool accepted = false;
    const int halvings = cfg.backtracking ? cfg.max_halvings : 0;
    for (int k = 0; k <= halvings; ++k, t *= 0.5) {
      const Vector trial = out.x + t * dx;
      Vector rt;
      try {
        rt = residual(trial);
      } catch (const DomainError&) {
        if (!cfg.backtracking) throw;
        continue;
      }
      const double nt = inf_norm(rt);
      if (!cfg.backtracking || nt < out.residual_norm) {
        out.x = trial;
        r = rt;
        out.residual_norm = nt;
        accepted = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!accepted) {
      throw NonConvergence("newton_solve: no decrease along the Newton direction (residual " +
                               std::to_string(out.residual_norm) + ")",
                           out.iterations, out.residual_norm);
    }
  }
  if (out.residual_norm <= cfg.residual_tol) return out;
  throw NonConvergence("newton_solve: iteration budget exhausted (residual " + std::to_string(out.residual_norm) + ")",
                       out.iterations, out.residual_norm);
}

Vector join(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out.head(a.size()) = a;
  out.tail(b.size()) = b;
  return out;
}

Vector join(const Vector& a, const Vector& b, const Vector& c) { return join(join(a, b), c); }

Vector random_normal(Rng& rng, int n, double sigma) {
  std::normal_distribution<double> dist(0.0, sigma);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

}  // namespace dlps
