#pragma once

#include <functional>
#include <string>

#include "dlps/reduction.hpp"

/// Two unit-mass particles in the plane with a separation potential, symmetric under SE(2).
///
/// Points of Q = C^2 are stored as (qx_re, qx_im, qy_re, qy_im); r = (qx - qy)/sqrt2 is the scaled
/// separation, z the center-of-mass offset per step.
namespace dlps::two_body {

/// V(s) of the squared separation s, with its derivative.
struct Potential {
  std::string family;  // "linear" (c s), "quadratic" (c s^2) or "zero"
  double coefficient = 0.0;
  std::function<double(double)> V;
  std::function<double(double)> dV;
};
Potential make_potential(const std::string& family, double coefficient);

struct TwoBodyConfig {
  double h = 0.1;
  Potential potential = make_potential("linear", 0.5);

  void validate() const;
};

/// Minimum particle separation accepted by the Lagrangian.
inline constexpr double kMinSeparation = 1e-12;

/// L_d(q0,q1) = (1/2h)(|dqx|^2 + |dqy|^2) - (h/2) V(|q0y - q0x|^2) as a DMS on C^2.
DlpsSystem make_full_system(const TwoBodyConfig& cfg);
/// Consecutive pairs with separations in [0.5, 2] and steps of size ~0.2.
C2Sampler full_sampler();
/// Default starting pair (q0, q1).
Vector default_initial();

QuotientModel t2_quotient();
QuotientModel se2_quotient();
/// U(1) acting on C* by rotation, quotient |r|.
QuotientModel u1_quotient();

/// A_d(q0,q1) = (s1 - s0)/2 with s = qx + qy.
DiscreteConnection make_t2_connection();
/// T2 connection from a flat metric on C^2.
DiscreteConnection make_t2_connection_flat(const Matrix& metric = Matrix::Identity(4, 4));
/// A_d = (phase(conj(r0) r1), (s1 - A s0)/2): horizontal pairs keep s and the direction of r.
DiscreteConnection make_se2_connection();
/// A_d(r0, r1) = phase(conj(r0) r1) on C*.
DiscreteConnection make_u1_connection();

/// Closed-form T2 model: upsilon(q0,q1) = ((r0, z0), r1), E' = C* x C over C*.
ReducedModel make_reduced_model();
/// One-shot SE(2) model with E_G = (|r0|, theta, v_re, v_im) over |r|.
ReducedModel make_se2_model(const DlpsSystem& full, const ValidationOptions& opts = {});

/// L'((r0,z0),r1) = (1/2h)(2|z0|^2 + |r1-r0|^2) - (h/2) V(2|r0|^2), y = (r0, z0, r1).
double closed_form_reduced_lagrangian(const TwoBodyConfig& cfg, const Vector& y);
/// Matrix of IVCM'(b d/dr1 + c d/dz1) = -c d/dz0 in (r, z) coordinates.
Matrix closed_form_reduced_ivcm();

struct ReducedStep {
  Vector r1;
  Vector z1;
  Vector r2;
};
/// z1 = z0, r2 = 2 r1 - r0 - 2 h^2 V'(2|r1|^2) r1. DomainError if r1 = 0.
ReducedStep closed_form_reduced_step(const TwoBodyConfig& cfg, const Vector& r0, const Vector& z0, const Vector& r1);

/// Residual U(1) = SE(2)/T2 action on E' = (r, z): (A r, A z).
ActionModel residual_action_E();
/// Residual action on M' = C*: A r.
ActionModel residual_action_M();

/// G = SE(2) reduced through H = T2 and then U(1).
StagedSetup make_staged_setup(const TwoBodyConfig& cfg, const ValidationOptions& opts = {});
/// H = G = SE(2): second stage is the identity.
StagedSetup make_staged_setup_h_is_g(const TwoBodyConfig& cfg, const ValidationOptions& opts = {});
/// H = {e}: first stage is the identity.
StagedSetup make_staged_setup_trivial_h(const TwoBodyConfig& cfg, const ValidationOptions& opts = {});

}  // namespace dlps::two_body
