#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dlps/lie.hpp"

namespace dlps {

using PointSampler = std::function<Vector(Rng&)>;

/// Coordinate model of the principal bundle Q -> Q/G.
///
/// `align(q)` is the group element moving q onto the section over its own base point:
/// act(align(q), q) = section(project(q)). For a free action this identifies Q with
/// (Q/G) x G and gives closed-form group matching.
struct QuotientModel {
  int total_dim = 0;
  int base_dim = 0;
  SmoothMap project;
  SmoothMap section;
  ActionModel action;
  std::function<GroupElement(const Vector&)> align;
  PointSampler sample;

  const LieGroup& group() const { return *action.group; }
  /// g with act(g, source) = target; MatchingError if the points lie on different orbits.
  GroupElement matching_element(const Vector& target, const Vector& source, double tol = 1e-9) const;
};

/// Quotient of R^n by the trivial group.
QuotientModel trivial_quotient(int n, PointSampler sample = nullptr);

struct QuotientReport {
  double invariance_violation = 0.0;  // |project(g q) - project(q)|
  double section_violation = 0.0;     // |project(section(r)) - r|
  double align_violation = 0.0;       // |act(align(q), q) - section(project(q))|
};
QuotientReport check_quotient(const QuotientModel& model, int n_samples, Rng& rng);

/// Discrete connection: partial map A_d: Q x Q -> G and its horizontal lift h_d.
class DiscreteConnection {
 public:
  using AdFn = std::function<GroupElement(const Vector&, const Vector&)>;
  using LiftFn = std::function<Vector(const Vector&, const Vector&)>;

  /// Without an explicit lift, h_d(q0, r1) = A_d(q0, s)^-1 s with s = align(q0)^-1 section(r1).
  DiscreteConnection(QuotientModel quotient, AdFn ad, LiftFn lift = nullptr);

  const QuotientModel& quotient() const { return quotient_; }
  const LieGroup& group() const { return quotient_.group(); }
  GroupElement ad(const Vector& q0, const Vector& q1) const;
  Vector horizontal_lift(const Vector& q0, const Vector& r1) const;

 private:
  QuotientModel quotient_;
  AdFn ad_;
  LiftFn lift_;
};

GroupElement ad(const DiscreteConnection& conn, const Vector& q0, const Vector& q1);
Vector horizontal_lift(const DiscreteConnection& conn, const Vector& q0, const Vector& r1);

/// Connection whose horizontal space is {(q0,q1): q1 - q0 orthogonal (in `metric`) to the orbit at q0}.
/// A_d is found by Newton on the group chart starting at the identity.
DiscreteConnection mechanical_connection_flat(const Matrix& metric, const QuotientModel& quotient);

/// The only connection for the trivial group.
DiscreteConnection trivial_connection(const QuotientModel& quotient);

using PairSample = std::pair<Vector, Vector>;

/// q0 from the quotient sampler, q1 = q0 + N(0, step_scale^2) noise.
std::vector<PairSample> sample_pairs(const QuotientModel& quotient, int n, Rng& rng, double step_scale = 0.3);

struct EquivarianceReport {
  double max_violation = 0.0;
  int samples = 0;
  Vector worst_q0;
  Vector worst_q1;
};

/// Max over samples of |A_d(g0 q0, g1 q1) - g1 A_d(q0,q1) g0^-1| with random g0, g1.
EquivarianceReport check_equivariance(const DiscreteConnection& conn, const std::vector<PairSample>& samples, Rng& rng);
EquivarianceReport check_equivariance(const DiscreteConnection& conn, int n_samples, Rng& rng);

/// Conjugation law for an H-connection under a larger group G acting on Q:
/// embed(A_d(g q0, g q1)) = g embed(A_d(q0, q1)) g^-1.
EquivarianceReport check_conjugation_equivariance(const DiscreteConnection& conn_H, const ActionModel& action_G,
                                                  const std::function<GroupElement(const GroupElement&)>& embed_H,
                                                  const std::vector<PairSample>& samples, Rng& rng);

/// Max |A_d(q0,q1) - A_d'(q0,q1)| over samples.
double connection_distance(const DiscreteConnection& a, const DiscreteConnection& b,
                           const std::vector<PairSample>& samples);

}  // namespace dlps
