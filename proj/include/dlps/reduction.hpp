#pragma once

#include <atomic>
#include <memory>
#include <vector>

#include "dlps/connection.hpp"
#include "dlps/dlps.hpp"

namespace dlps {

/// Coordinates on the slice phi^-1(section(M/G)) of E. The first base_dim coordinates must be
/// the M/G coordinates of phi(eps), so the reduced bundle is a product over M/G.
struct SliceChart {
  int dim = 0;
  SmoothMap coords;  // E (on the slice) -> R^dim
  SmoothMap point;   // R^dim -> E
};

/// Slice chart for E = M: coordinates are the quotient coordinates themselves.
SliceChart identity_slice(const QuotientModel& quotient);

/// Coordinate model of the reduction C'(E) -> C'(G~_E) = G~_E x (M/G).
struct ReducedModel {
  FiberBundleModel reduced_bundle;
  SmoothMap upsilon;
  SmoothMap lift_section;  // upsilon o lift_section = id
  ActionModel group_action;  // diagonal action on C'(E)
  ActionModel action_E;
  ActionModel action_M;
  QuotientModel base_quotient;  // M -> M/G, used for group matching
  FiberBundleModel source_bundle;

  const LieGroup& group() const { return *group_action.group; }
  int source_c1_dim() const { return source_bundle.total_dim + source_bundle.base_dim; }
  int target_c1_dim() const { return reduced_bundle.total_dim + reduced_bundle.base_dim; }
};

/// Reduced model for the trivial group: upsilon = lift_section = id.
ReducedModel identity_model(const DlpsSystem& sys);

struct ModelReport {
  double upsilon_invariance = 0.0;  // |upsilon(g x) - upsilon(x)|
  double section_identity = 0.0;    // |upsilon(lift_section(y)) - y|
  Eigen::Index d1_min_rank = 0;     // min rank of D1(p1 o upsilon), should be dim E'
  int samples = 0;
  Vector worst_sample;
};
ModelReport check_model(const ReducedModel& model, const std::vector<Vector>& c1_samples, Rng& rng);
/// Throws ValidationError naming the failed identity.
void validate_model(const ReducedModel& model, const std::vector<Vector>& c1_samples, Rng& rng, double tol = 1e-9);

struct SymmetryReport {
  double lagrangian_invariance = 0.0;
  double ivcm_equivariance = 0.0;
  int samples = 0;
};
SymmetryReport check_symmetry(const DlpsSystem& sys, const ActionModel& action_E, const ActionModel& action_M,
                              const std::vector<C2Point>& samples, Rng& rng);

struct ValidationOptions {
  bool enabled = true;
  int samples = 20;
  std::uint64_t seed = 0x5eed;
  double tol = 1e-9;
};

/// Reduction model from a connection on M:
///   upsilon(eps0, m1) = (slice(kappa eps0), chart(kappa A_d(phi eps0, m1) kappa^-1), project(m1))
/// with kappa = align(phi(eps0)).
ReducedModel build_upsilon(const DiscreteConnection& conn, const DlpsSystem& sys, const ActionModel& action_E,
                           const SliceChart& slice, const ValidationOptions& opts = {});
/// DMS case (E = M = Q).
ReducedModel build_upsilon(const DiscreteConnection& conn, const DlpsSystem& sys, const ValidationOptions& opts = {});

struct ReductionResult {
  DlpsSystem system;
  ReducedModel model;
  std::shared_ptr<std::atomic<long>> flagged;  // reduced-IVCM evaluations that needed a pseudo-inverse

  long flagged_samples() const { return flagged ? flagged->load() : 0; }
};

/// Reduced DLPS: L' = L o lift_section and the reduced IVCM.
ReductionResult reduce(const DlpsSystem& sys, const ReducedModel& model, const ValidationOptions& opts = {});

/// Representative in C''(E) of a reduced consecutive pair.
C2Point lift_c2(const ReducedModel& model, const Vector& y0, const Vector& y1);

/// Reduced IVCM matrix computed from an explicit representative pair (x0, x1) in C''(E).
Matrix reduced_ivcm_at(const ReducedModel& model, const DlpsSystem& sys, const Vector& x0, const Vector& x1,
                       bool* used_pseudo_inverse = nullptr);

DiscretePath project_path(const ReducedModel& model, const DiscretePath& path);

/// Unique lift of a reduced trajectory starting at (eps0, m1).
DiscretePath reconstruct_path(const ReducedModel& model, const DiscretePath& reduced, const Vector& eps0,
                              const Vector& m1);

/// Residual G/H actions on the H-reduced bundle, realized as upsilon_H o l_g o lift_section_H
/// for any lift g of the G/H element.
struct ResidualActions {
  ActionModel action_E;
  ActionModel action_M;
  ActionModel action_C1;
};
ResidualActions residual_actions(const ReducedModel& model_H, const ActionModel& g_action_E,
                                 const ActionModel& g_action_M, LieGroupPtr quotient_group,
                                 std::function<GroupElement(const GroupElement&)> lift_to_G);

struct StagedSetup {
  DlpsSystem system;
  ReducedModel model_H;   // C'(E) -> C'(E_H)
  ReducedModel model_GH;  // C'(E_H) -> C'(E_GH), residual group G/H
  ReducedModel model_G;   // C'(E) -> C'(E_G)
  DiscreteConnection conn_H;
  ActionModel action_G_on_M;
  std::function<GroupElement(const GroupElement&)> embed_H;
};

struct StagedSystems {
  ReductionResult by_H;
  ReductionResult by_GH;
  ReductionResult by_G;
};
StagedSystems reduce_in_stages(const StagedSetup& setup, const ValidationOptions& opts = {});

/// F(y) = upsilon_G(lift_H(lift_GH(y))).
SmoothMap stage_map(const StagedSetup& setup);

struct StageReport {
  double max_violation = 0.0;
  std::vector<double> per_step;
  double conjugation_violation = 0.0;
};
/// Validates the conjugation law for conn_H, then compares F(upsilon_GH(upsilon_H(x))) with upsilon_G(x).
StageReport two_stage(const StagedSetup& setup, const DiscretePath& trajectory, Rng& rng, int conjugation_samples = 100,
                      double conjugation_tol = 1e-10);

struct MorphismReport {
  Eigen::Index full_rank_min = 0;  // condition 1, rank evidence only
  bool cond1_rank_ok = true;
  Eigen::Index d1_rank_min = 0;
  bool cond2_ok = true;
  double cond3 = 0.0;
  double cond4 = 0.0;
  double cond5 = 0.0;
  double cond6 = 0.0;
  int samples = 0;

  bool passes(double tol) const {
    return cond1_rank_ok && cond2_ok && cond3 <= tol && cond4 <= tol && cond5 <= tol && cond6 <= tol;
  }
};
/// Pointwise check of the morphism conditions for candidate: C'(E) -> C'(E') at C'' samples.
MorphismReport check_morphism(const SmoothMap& candidate, const DlpsSystem& sys, const DlpsSystem& target,
                              const std::vector<C2Point>& samples);

/// Diagonal action l_g on C'(E) as a smooth map.
SmoothMap translation_map(const ActionModel& c1_action, const GroupElement& g);

std::vector<C2Point> sample_c2(const DlpsSystem& sys, int n, Rng& rng);
/// Consecutive pairs of a path as C'' samples.
std::vector<C2Point> path_c2(const DiscretePath& path);

}  // namespace dlps
