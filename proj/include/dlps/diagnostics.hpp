#pragma once

#include <vector>

#include "dlps/reduction.hpp"

namespace dlps {

/// components(i) = J_d(eps0, m1) evaluated on the i-th algebra basis element.
struct MomentumValue {
  Vector components;
};

/// J_d(eps0, m1)(xi) = -D1 L_d(eps0, m1) . xi_E(eps0).
MomentumValue momentum(const DlpsSystem& sys, const ActionModel& action_E, const Vector& eps0, const Vector& m1);

struct MomentumReport {
  double max_violation = 0.0;  // evolution identity, max over k and basis elements
  double max_drift = 0.0;      // max_k |J_k - J_0|
  double max_residual = 0.0;   // largest equations-of-motion residual along the path
  bool precondition_ok = true; // false if max_residual > residual_tol
  std::vector<Vector> series;  // J_k for every pair of the path
};

/// Checks J_k = J_{k-1} + D1 L_d(x_{k-1}) . IVCM(x_{k-1}, x_k)(xi_E(eps_k)) along a path.
MomentumReport momentum_evolution_check(const DlpsSystem& sys, const ActionModel& action_E,
                                        const DiscretePath& trajectory, double residual_tol = 1e-7);

struct SymplecticReport {
  double max_violation = 0.0;
  std::vector<double> per_step;
  double min_rcond = 0.0;  // smallest reciprocal condition of D1D2 L_d seen
};

/// Flow map of a DMS in Legendre coordinates (q0, p0 = -D1 L_d) -> (q1, p1 = D2 L_d).
/// `guess` seeds the implicit solve for q1.
Vector legendre_flow(const DlpsSystem& dms, const Vector& qp, const Vector& guess);

/// max |K^T Omega K - Omega| over the pairs of a DMS trajectory, K the FD Jacobian of the flow map.
SymplecticReport symplectic_check(const DlpsSystem& dms, const DiscretePath& trajectory);

struct PoissonReport {
  double max_variation = 0.0;  // max |{F_i,F_j}(g x) - {F_i,F_j}(x)|
  double max_bracket = 0.0;
  int samples = 0;
};

/// Matrix of brackets {f_i o upsilon, f_j o upsilon}(x) for the symplectic form of a DMS.
Matrix pulled_back_brackets(const ReducedModel& model, const DlpsSystem& dms, const std::vector<SmoothMap>& test_fns,
                            const Vector& x);

/// Coordinate functions y -> y_i of the reduced space.
std::vector<SmoothMap> coordinate_functions(int dim);

/// Orbit variation of pulled-back brackets at `samples` points and `group_draws` random elements each.
PoissonReport poisson_descent_check(const ReducedModel& model, const DlpsSystem& dms,
                                    const std::vector<SmoothMap>& test_fns, const std::vector<Vector>& samples,
                                    Rng& rng, int group_draws = 5);

}  // namespace dlps
