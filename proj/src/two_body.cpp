#include "dlps/two_body.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace dlps::two_body {

namespace {

using Complex = std::complex<double>;

const double kSqrt2 = std::sqrt(2.0);

Complex cx(const Vector& v, int i) { return {v(i), v(i + 1)}; }

void put(Vector& v, int i, Complex c) {
  v(i) = c.real();
  v(i + 1) = c.imag();
}

Vector pack(std::initializer_list<Complex> values) {
  Vector v(2 * static_cast<int>(values.size()));
  int i = 0;
  for (Complex c : values) {
    put(v, i, c);
    i += 2;
  }
  return v;
}

Complex phase(Complex c, const char* who) {
  const double a = std::abs(c);
  if (a < kMinSeparation) throw DomainError(std::string(who) + ": undefined phase at a degenerate configuration");
  return c / a;
}

GroupElement se2(Complex A, Complex v) { return {pack({A, v})}; }
GroupElement u1(Complex A) { return {pack({A})}; }
GroupElement t2(Complex v) { return {pack({v})}; }

Vector sample_q(Rng& rng) {
  std::uniform_real_distribution<double> sep(0.5, 2.0), angle(-M_PI, M_PI);
  const Vector n = random_normal(rng, 2);
  const Complex qx(n(0), n(1));
  const Complex d = std::polar(sep(rng), angle(rng));
  return pack({qx, qx - d});
}

Vector sample_r(Rng& rng) {
  std::uniform_real_distribution<double> mag(0.5, 2.0), angle(-M_PI, M_PI);
  return pack({std::polar(mag(rng), angle(rng))});
}

// Next configuration 0.2-close to q that keeps the particles apart.
Vector nearby_q(const Vector& q, Rng& rng) {
  for (;;) {
    const Vector next = q + random_normal(rng, 4, 0.2);
    if (std::abs(cx(next, 0) - cx(next, 2)) > 0.1) return next;
  }
}

Matrix t2_upsilon_matrix() {
  // y = (r0, z0, r1) from x = (q0x, q0y, q1x, q1y), each block acting on complex coordinates.
  Matrix U = Matrix::Zero(6, 8);
  const Matrix I = Matrix::Identity(2, 2);
  U.block(0, 0, 2, 2) = I / kSqrt2;
  U.block(0, 2, 2, 2) = -I / kSqrt2;
  U.block(2, 0, 2, 2) = -I / 2;
  U.block(2, 2, 2, 2) = -I / 2;
  U.block(2, 4, 2, 2) = I / 2;
  U.block(2, 6, 2, 2) = I / 2;
  U.block(4, 4, 2, 2) = I / kSqrt2;
  U.block(4, 6, 2, 2) = -I / kSqrt2;
  return U;
}

Matrix t2_lift_matrix() {
  // q0 = (r0, -r0)/sqrt2, q1 = (z0 + r1/sqrt2, z0 - r1/sqrt2).
  Matrix S = Matrix::Zero(8, 6);
  const Matrix I = Matrix::Identity(2, 2);
  S.block(0, 0, 2, 2) = I / kSqrt2;
  S.block(2, 0, 2, 2) = -I / kSqrt2;
  S.block(4, 2, 2, 2) = I;
  S.block(4, 4, 2, 2) = I / kSqrt2;
  S.block(6, 2, 2, 2) = I;
  S.block(6, 4, 2, 2) = -I / kSqrt2;
  return S;
}

// Slice of E' = (r, z) through real positive r: coordinates (|r|, z).
SliceChart stage_two_slice() {
  SliceChart s;
  s.dim = 3;
  s.coords = SmoothMap(4, 3, [](const Vector& e) {
    Vector c(3);
    c << e(0), e(2), e(3);
    return c;
  });
  s.point = SmoothMap(3, 4, [](const Vector& c) {
    Vector e(4);
    e << c(0), 0.0, c(1), c(2);
    return e;
  });
  return s;
}

}  // namespace

Potential make_potential(const std::string& family, double coefficient) {
  if (!std::isfinite(coefficient)) throw std::invalid_argument("make_potential: coefficient must be finite");
  const double c = coefficient;
  if (family == "linear") return {family, c, [c](double s) { return c * s; }, [c](double) { return c; }};
  if (family == "quadratic") {
    return {family, c, [c](double s) { return c * s * s; }, [c](double s) { return 2.0 * c * s; }};
  }
  if (family == "zero") return {family, 0.0, [](double) { return 0.0; }, [](double) { return 0.0; }};
  throw std::invalid_argument("make_potential: unknown family '" + family + "'");
}

void TwoBodyConfig::validate() const {
  if (h == 0.0 || !std::isfinite(h)) throw std::invalid_argument("TwoBodyConfig: h must be finite and nonzero");
  if (!potential.V || !potential.dV) throw std::invalid_argument("TwoBodyConfig: potential is not set");
}

DlpsSystem make_full_system(const TwoBodyConfig& cfg) {
  cfg.validate();
  const double h = cfg.h;
  const Potential P = cfg.potential;
  auto separation = [](const Vector& x) {
    const Complex u = cx(x, 0) - cx(x, 2);
    if (std::abs(u) < kMinSeparation) throw DomainError("two-body Lagrangian: particles coincide");
    return u;
  };
  auto eval = [h, P, separation](const Vector& x) {
    const Complex u = separation(x);
    const double kinetic = (x.tail(4) - x.head(4)).squaredNorm() / (2.0 * h);
    return Vector::Constant(1, kinetic - 0.5 * h * P.V(std::norm(u)));
  };
  auto jac = [h, P, separation](const Vector& x) {
    const Complex u = separation(x);
    const Vector d = (x.tail(4) - x.head(4)) / h;
    const Complex f = h * P.dV(std::norm(u)) * u;
    Matrix J(1, 8);
    J.row(0).head(4) = -d.transpose();
    J.row(0).tail(4) = d.transpose();
    J(0, 0) -= f.real();
    J(0, 1) -= f.imag();
    J(0, 2) += f.real();
    J(0, 3) += f.imag();
    return J;
  };
  return from_dms(4, SmoothMap(8, 1, eval, jac), full_sampler());
}

C2Sampler full_sampler() {
  return [](Rng& rng) {
    const Vector q0 = sample_q(rng);
    const Vector q1 = nearby_q(q0, rng);
    const Vector q2 = nearby_q(q1, rng);
    return C2Point{join(q0, q1), join(q1, q2)};
  };
}

Vector default_initial() {
  Vector x(8);
  x << 1.0, 0.0, -1.0, 0.0, 1.01, 0.05, -0.99, -0.03;
  return x;
}

QuotientModel t2_quotient() {
  QuotientModel q;
  q.total_dim = 4;
  q.base_dim = 2;
  q.project = SmoothMap(4, 2, [](const Vector& v) { return pack({(cx(v, 0) - cx(v, 2)) / kSqrt2}); });
  q.section = SmoothMap(2, 4, [](const Vector& r) { return pack({cx(r, 0) / kSqrt2, -cx(r, 0) / kSqrt2}); });
  q.action = t2_planar_action(2);
  q.align = [](const Vector& v) { return t2(-(cx(v, 0) + cx(v, 2)) / 2.0); };
  q.sample = sample_q;
  return q;
}

QuotientModel se2_quotient() {
  QuotientModel q;
  q.total_dim = 4;
  q.base_dim = 1;
  q.project = SmoothMap(4, 1, [](const Vector& v) {
    return Vector::Constant(1, std::abs(cx(v, 0) - cx(v, 2)) / kSqrt2);
  });
  q.section = SmoothMap(1, 4, [](const Vector& rho) { return pack({rho(0) / kSqrt2, -rho(0) / kSqrt2}); });
  q.action = se2_planar_action(2);
  q.align = [](const Vector& v) {
    const Complex B = std::conj(phase(cx(v, 0) - cx(v, 2), "SE(2) align"));
    return se2(B, -B * (cx(v, 0) + cx(v, 2)) / 2.0);
  };
  q.sample = sample_q;
  return q;
}

QuotientModel u1_quotient() {
  QuotientModel q;
  q.total_dim = 2;
  q.base_dim = 1;
  q.project = SmoothMap(2, 1, [](const Vector& r) { return Vector::Constant(1, std::abs(cx(r, 0))); });
  q.section = SmoothMap(1, 2, [](const Vector& rho) { return pack({Complex(rho(0), 0.0)}); });
  q.action = u1_planar_action(1);
  q.align = [](const Vector& r) { return u1(std::conj(phase(cx(r, 0), "U(1) align"))); };
  q.sample = sample_r;
  return q;
}

DiscreteConnection make_t2_connection() {
  return DiscreteConnection(
      t2_quotient(),
      [](const Vector& q0, const Vector& q1) {
        return t2(((cx(q1, 0) + cx(q1, 2)) - (cx(q0, 0) + cx(q0, 2))) / 2.0);
      },
      [](const Vector& q0, const Vector& r1) {
        const Complex c = (cx(q0, 0) + cx(q0, 2)) / 2.0, r = cx(r1, 0) / kSqrt2;
        return pack({c + r, c - r});
      });
}

DiscreteConnection make_t2_connection_flat(const Matrix& metric) { return mechanical_connection_flat(metric, t2_quotient()); }

DiscreteConnection make_se2_connection() {
  return DiscreteConnection(
      se2_quotient(),
      [](const Vector& q0, const Vector& q1) {
        const Complex r0 = cx(q0, 0) - cx(q0, 2), r1 = cx(q1, 0) - cx(q1, 2);
        const Complex A = phase(std::conj(r0) * r1, "SE(2) connection");
        return se2(A, ((cx(q1, 0) + cx(q1, 2)) - A * (cx(q0, 0) + cx(q0, 2))) / 2.0);
      },
      [](const Vector& q0, const Vector& rho1) {
        const Complex u = phase(cx(q0, 0) - cx(q0, 2), "SE(2) horizontal lift");
        const Complex c = (cx(q0, 0) + cx(q0, 2)) / 2.0, d = rho1(0) / kSqrt2 * u;
        return pack({c + d, c - d});
      });
}

DiscreteConnection make_u1_connection() {
  return DiscreteConnection(
      u1_quotient(),
      [](const Vector& r0, const Vector& r1) {
        return u1(phase(std::conj(cx(r0, 0)) * cx(r1, 0), "U(1) connection"));
      },
      [](const Vector& r0, const Vector& rho1) {
        return pack({phase(cx(r0, 0), "U(1) horizontal lift") * rho1(0)});
      });
}

ReducedModel make_reduced_model() {
  const ActionModel t2a = t2_planar_action(2);
  return {FiberBundleModel::product(2, 2),
          linear_map(t2_upsilon_matrix()),
          linear_map(t2_lift_matrix()),
          product_action(t2a, t2a),
          t2a,
          t2a,
          t2_quotient(),
          FiberBundleModel::identity(4)};
}

ReducedModel make_se2_model(const DlpsSystem& full, const ValidationOptions& opts) {
  return build_upsilon(make_se2_connection(), full, opts);
}

double closed_form_reduced_lagrangian(const TwoBodyConfig& cfg, const Vector& y) {
  if (y.size() != 6) throw std::invalid_argument("closed_form_reduced_lagrangian: expected (r0, z0, r1)");
  const Complex r0 = cx(y, 0), z0 = cx(y, 2), r1 = cx(y, 4);
  return (2.0 * std::norm(z0) + std::norm(r1 - r0)) / (2.0 * cfg.h) - 0.5 * cfg.h * cfg.potential.V(2.0 * std::norm(r0));
}

Matrix closed_form_reduced_ivcm() {
  Matrix M = Matrix::Zero(4, 4);
  M.bottomRightCorner(2, 2) = -Matrix::Identity(2, 2);
  return M;
}

ReducedStep closed_form_reduced_step(const TwoBodyConfig& cfg, const Vector& r0, const Vector& z0, const Vector& r1) {
  cfg.validate();
  if (r0.size() != 2 || z0.size() != 2 || r1.size() != 2) {
    throw std::invalid_argument("closed_form_reduced_step: arguments are complex numbers");
  }
  if (r1.norm() < kMinSeparation) throw DomainError("closed_form_reduced_step: r1 = 0 (particle collision)");
  const double h = cfg.h;
  const Vector r2 = 2.0 * r1 - r0 - 2.0 * h * h * cfg.potential.dV(2.0 * r1.squaredNorm()) * r1;
  return {r1, z0, r2};
}

ActionModel residual_action_E() { return u1_planar_action(2); }
ActionModel residual_action_M() { return u1_planar_action(1); }

StagedSetup make_staged_setup(const TwoBodyConfig& cfg, const ValidationOptions& opts) {
  const DlpsSystem full = make_full_system(cfg);
  const ReducedModel model_H = make_reduced_model();
  const DlpsSystem by_H = reduce(full, model_H, opts).system;
  const ReducedModel model_GH = build_upsilon(make_u1_connection(), by_H, residual_action_E(), stage_two_slice(), opts);
  return {full,
          model_H,
          model_GH,
          make_se2_model(full, opts),
          make_t2_connection(),
          se2_planar_action(2),
          embed_translation};
}

StagedSetup make_staged_setup_h_is_g(const TwoBodyConfig& cfg, const ValidationOptions& opts) {
  const DlpsSystem full = make_full_system(cfg);
  const ReducedModel model_G = make_se2_model(full, opts);
  const DlpsSystem by_G = reduce(full, model_G, opts).system;
  return {full,
          model_G,
          identity_model(by_G),
          model_G,
          make_se2_connection(),
          se2_planar_action(2),
          [](const GroupElement& g) { return g; }};
}

StagedSetup make_staged_setup_trivial_h(const TwoBodyConfig& cfg, const ValidationOptions& opts) {
  const DlpsSystem full = make_full_system(cfg);
  const ReducedModel model_G = make_se2_model(full, opts);
  return {full,
          identity_model(full),
          model_G,
          model_G,
          trivial_connection(trivial_quotient(4, sample_q)),
          se2_planar_action(2),
          [](const GroupElement&) { return se2_group()->identity(); }};
}

}  // namespace dlps::two_body
