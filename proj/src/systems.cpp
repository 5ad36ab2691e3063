#include "dlps/systems.hpp"

#include <stdexcept>

namespace dlps {

DlpsSystem quadratic_dms(const Matrix& mass, const Matrix& stiffness, double h) {
  const Eigen::Index n = mass.rows();
  if (mass.cols() != n || stiffness.rows() != n || stiffness.cols() != n) {
    throw std::invalid_argument("quadratic_dms: mass and stiffness must be square of equal size");
  }
  if (h == 0.0) throw std::invalid_argument("quadratic_dms: h must be nonzero");
  const Matrix M = 0.5 * (mass + mass.transpose());
  const Matrix K = 0.5 * (stiffness + stiffness.transpose());
  auto value = [M, K, h, n](const Vector& x) {
    const Vector q0 = x.head(n), q1 = x.tail(n), d = q1 - q0;
    const double L = d.dot(M * d) / (2.0 * h) - 0.25 * h * (q0.dot(K * q0) + q1.dot(K * q1));
    return Vector::Constant(1, L);
  };
  auto grad = [M, K, h, n](const Vector& x) {
    const Vector q0 = x.head(n), q1 = x.tail(n), Md = M * (q1 - q0) / h;
    Matrix J(1, 2 * n);
    J.leftCols(n) = (-Md - 0.5 * h * (K * q0)).transpose();
    J.rightCols(n) = (Md - 0.5 * h * (K * q1)).transpose();
    return J;
  };
  const int dim = static_cast<int>(n);
  return from_dms(dim, SmoothMap(2 * dim, 1, value, grad), dms_pair_sampler(dim));
}

DlpsSystem free_particle(int dim, double h, double mass) {
  return quadratic_dms(mass * Matrix::Identity(dim, dim), Matrix::Zero(dim, dim), h);
}

DlpsSystem harmonic_oscillator(double h, double omega, int dim) {
  return quadratic_dms(Matrix::Identity(dim, dim), omega * omega * Matrix::Identity(dim, dim), h);
}

C2Sampler dms_pair_sampler(int n, double step) {
  return [n, step](Rng& rng) {
    const Vector q0 = random_normal(rng, n);
    const Vector q1 = q0 + random_normal(rng, n, step);
    const Vector q2 = q1 + random_normal(rng, n, step);
    return C2Point{join(q0, q1), join(q1, q2)};
  };
}

}  // namespace dlps
