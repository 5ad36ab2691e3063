#pragma once

#include <functional>
#include <memory>
#include <string>

#include "dlps/smooth.hpp"

namespace dlps {

/// Group element in model-dependent coordinates.
/// SE(2): (a_re, a_im, v_re, v_im) with |a| = 1; U(1): (a_re, a_im); T_n: v; trivial group: empty.
struct GroupElement {
  Vector coords;
};

/// Finite-dimensional Lie group in global coordinates.
///
/// `chart`/`from_chart` give local coordinates of dimension dim() centred at the identity
/// (chart(e) = 0); they are used for Newton solves on the group and for conjugate-bundle
/// coordinates. `exp_small` maps algebra coordinates (against the fixed basis) to the group.
class LieGroup {
 public:
  virtual ~LieGroup() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int coord_size() const = 0;
  virtual GroupElement identity() const = 0;
  virtual GroupElement compose(const GroupElement& a, const GroupElement& b) const = 0;
  virtual GroupElement inverse(const GroupElement& g) const = 0;
  virtual GroupElement exp_small(const Vector& xi) const = 0;
  virtual Vector chart(const GroupElement& g) const = 0;
  virtual GroupElement from_chart(const Vector& c) const = 0;
  /// Element drawn from a distribution covering the group (rotations uniform, translations N(0, 2^2)).
  virtual GroupElement random(Rng& rng) const = 0;
};

using LieGroupPtr = std::shared_ptr<const LieGroup>;

LieGroupPtr se2_group();
LieGroupPtr u1_group();
LieGroupPtr translation_group(int n);
inline LieGroupPtr t2_group() { return translation_group(2); }
LieGroupPtr trivial_group();

GroupElement compose(const LieGroup& G, const GroupElement& a, const GroupElement& b);
GroupElement inverse(const LieGroup& G, const GroupElement& g);
/// g h g^-1
GroupElement conjugate(const LieGroup& G, const GroupElement& g, const GroupElement& h);
/// Max-abs coordinate distance.
double group_distance(const GroupElement& a, const GroupElement& b);
/// from_chart(scale * N(0, 1)).
GroupElement random_near_identity(const LieGroup& G, Rng& rng, double scale);

/// pi^{G,H}: SE(2) -> SE(2)/T2 = U(1), keeps the rotation part.
GroupElement project_to_quotient(const GroupElement& se2_element);
/// T2 -> SE(2), v -> (1, v).
GroupElement embed_translation(const GroupElement& t2_element);
/// U(1) -> SE(2), A -> (A, 0).
GroupElement embed_rotation(const GroupElement& u1_element);

using ActFn = std::function<Vector(const GroupElement&, const Vector&)>;

/// Smooth left action of a Lie group on R^space_dim.
struct ActionModel {
  LieGroupPtr group;
  int space_dim = 0;
  ActFn act_fn;

  Vector act(const GroupElement& g, const Vector& q) const;
  const LieGroup& G() const { return *group; }
};

/// d/dt|0 act(exp_small(t xi_i), q) by a 4th-order central stencil in t.
Vector infinitesimal_generator(const ActionModel& action, int xi_index, const Vector& q);
/// Columns are the generators for every algebra basis element.
Matrix generator_matrix(const ActionModel& action, const Vector& q);
/// Jacobian of q -> act(g, q).
Matrix action_differential(const ActionModel& action, const GroupElement& g, const Vector& q);

/// SE(2) acting on C^n (all points moved by the same rigid motion).
ActionModel se2_planar_action(int n_points);
/// Translations T2 acting on C^n.
ActionModel t2_planar_action(int n_points);
/// U(1) acting on C^n by rotation about the origin.
ActionModel u1_planar_action(int n_points);
/// T_n acting on (R^n)^copies by translating every copy.
ActionModel translation_action(int n, int copies = 1);
ActionModel trivial_action(int space_dim);
/// Same group acting on both factors of R^a x R^b.
ActionModel product_action(const ActionModel& a, const ActionModel& b);
/// Action obtained through a homomorphism phi: K -> G.
ActionModel pullback_action(const ActionModel& a, LieGroupPtr K, std::function<GroupElement(const GroupElement&)> phi);

struct GroupAxiomReport {
  double inverse_violation = 0.0;
  double associativity_violation = 0.0;
};
GroupAxiomReport check_group_axioms(const LieGroup& G, int n_samples, Rng& rng);

struct ActionAxiomReport {
  double identity_violation = 0.0;
  double compatibility_violation = 0.0;
};
ActionAxiomReport check_action_axioms(const ActionModel& action, const std::function<Vector(Rng&)>& sampler,
                                      int n_samples, Rng& rng);

}  // namespace dlps
