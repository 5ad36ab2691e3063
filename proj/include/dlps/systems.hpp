#pragma once

#include "dlps/dlps.hpp"

namespace dlps {

/// L_d(q0,q1) = (1/2h)(q1-q0)^T M (q1-q0) - (h/4)(q0^T K q0 + q1^T K q1), with analytic gradient.
DlpsSystem quadratic_dms(const Matrix& mass, const Matrix& stiffness, double h);

/// Free particle in R^dim: L_d = (mass/2h)|q1-q0|^2.
DlpsSystem free_particle(int dim, double h, double mass = 1.0);

/// Isotropic harmonic oscillator in R^dim with frequency omega (trapezoidal potential term).
DlpsSystem harmonic_oscillator(double h, double omega = 1.0, int dim = 1);

/// Consecutive-pair sampler for DMS on R^n: q0 ~ N(0,1), steps ~ N(0, step^2).
C2Sampler dms_pair_sampler(int n, double step = 0.3);

}  // namespace dlps
