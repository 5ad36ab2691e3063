#include <gtest/gtest.h>

#include <cmath>

#include "dlps/reduction.hpp"
#include "dlps/systems.hpp"
#include "dlps/two_body.hpp"

using namespace dlps;
namespace tb = dlps::two_body;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

struct Fixture {
  tb::TwoBodyConfig cfg;
  DlpsSystem full = tb::make_full_system(cfg);
  ReducedModel model = tb::make_reduced_model();
  ReductionResult red = reduce(full, model);
  DiscretePath path = simulate(full, tb::default_initial().head(4), tb::default_initial().tail(4), 100).value();
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

double path_distance(const DiscretePath& a, const DiscretePath& b) {
  EXPECT_EQ(a.size(), b.size());
  double m = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) m = std::max(m, inf_norm(Vector(a[k] - b[k])));
  return m;
}

std::vector<Vector> firsts(const std::vector<C2Point>& pairs) {
  std::vector<Vector> out;
  for (const auto& p : pairs) out.push_back(p.first);
  return out;
}

}  // namespace

TEST(Upsilon, ReferencePair) {
  const Vector y = fixture().model.upsilon(vec({0, 0, 2, 0, 1, 0, 3, 0}));
  const double s = std::sqrt(2.0);
  EXPECT_LT(inf_norm(Vector(y - vec({-s, 0, 1, 0, -s, 0}))), 1e-14);
}

TEST(Upsilon, ShippedModelsSatisfyTheirIdentities) {
  const Fixture& f = fixture();
  Rng rng(41);
  const std::vector<Vector> xs = firsts(sample_c2(f.full, 100, rng));
  for (const ReducedModel& m : {f.model, tb::make_se2_model(f.full)}) {
    const ModelReport rep = check_model(m, xs, rng);
    EXPECT_LE(rep.upsilon_invariance, 1e-10);
    EXPECT_LE(rep.section_identity, 1e-10);
    EXPECT_EQ(rep.d1_min_rank, m.reduced_bundle.total_dim);
  }
}

TEST(Upsilon, GenericConstructionMatchesClosedForm) {
  const Fixture& f = fixture();
  const ReducedModel generic = build_upsilon(tb::make_t2_connection(), f.full);
  Rng rng(42);
  for (const Vector& x : firsts(sample_c2(f.full, 100, rng)))
    EXPECT_LT(inf_norm(Vector(generic.upsilon(x) - f.model.upsilon(x))), 1e-10);
}

TEST(Upsilon, NonInvariantLagrangianIsRejected) {
  const Fixture& f = fixture();
  const SmoothMap base = f.full.lagrangian();
  const DlpsSystem tilted = f.full.with_lagrangian(
      SmoothMap(8, 1, [base](const Vector& x) { return Vector(base(x).array() + 0.3 * x(0)); }));
  EXPECT_THROW(build_upsilon(tb::make_t2_connection(), tilted), ValidationError);
}

TEST(ReducedSystem, LagrangianMatchesClosedForm) {
  const Fixture& f = fixture();
  Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    Vector y = join(random_normal(rng, 2), random_normal(rng, 2, 0.5), random_normal(rng, 2));
    if (y.head(2).norm() < 0.1) continue;
    EXPECT_NEAR(f.red.system.lagrangian_value(y), tb::closed_form_reduced_lagrangian(f.cfg, y), 1e-10);
  }
}

TEST(ReducedSystem, IvcmMatchesClosedForm) {
  const Fixture& f = fixture();
  Rng rng(44);
  const Matrix D = tb::closed_form_reduced_ivcm();
  for (const auto& [y0, y1] : sample_c2(f.red.system, 50, rng))
    EXPECT_LT(inf_norm(Matrix(f.red.system.ivcm_matrix(y0, y1) - D)), 1e-9);
  EXPECT_EQ(f.red.flagged_samples(), 0);
}

TEST(ReducedSystem, IvcmDoesNotDependOnTheRepresentative) {
  const Fixture& f = fixture();
  Rng rng(45);
  for (const auto& [y0, y1] : sample_c2(f.red.system, 20, rng)) {
    const auto [x0, x1] = lift_c2(f.model, y0, y1);
    const GroupElement g = f.model.group().random(rng);
    const Matrix a = reduced_ivcm_at(f.model, f.full, x0, x1);
    const Matrix b = reduced_ivcm_at(f.model, f.full, f.model.group_action.act(g, x0), f.model.group_action.act(g, x1));
    EXPECT_LT(inf_norm(Matrix(a - b)), 1e-9);
  }
}

TEST(ReducedSystem, TrivialGroupLeavesSystemUnchanged) {
  const DlpsSystem ho = harmonic_oscillator(0.1, 1.5, 2).with_sampler(dms_pair_sampler(2));
  const ReductionResult red = reduce(ho, identity_model(ho));
  Rng rng(46);
  for (const auto& [x0, x1] : sample_c2(ho, 20, rng)) {
    EXPECT_DOUBLE_EQ(red.system.lagrangian_value(x0), ho.lagrangian_value(x0));
    EXPECT_EQ(inf_norm(red.system.ivcm(x0, x1, Vector::Ones(2))), 0.0);
  }
  const DiscretePath a = simulate(ho, vec({1, 0}), vec({0.99, 0.1}), 20).value();
  const DiscretePath b = simulate(red.system, vec({1, 0}), vec({0.99, 0.1}), 20).value();
  EXPECT_LE(path_distance(a, b), 1e-12);
}

TEST(ReducedSystem, DimensionMismatchIsRejected) {
  EXPECT_ANY_THROW(reduce(free_particle(1, 0.1), tb::make_reduced_model()));
}

TEST(Projection, ReducedFlowMatchesProjectedTrajectory) {
  const Fixture& f = fixture();
  const DiscretePath projected = project_path(f.model, f.path);
  double res = 0.0;
  for (double r : path_residuals(f.red.system, projected)) res = std::max(res, r);
  EXPECT_LE(res, 1e-9);
  const DiscretePath reduced = simulate(f.red.system, projected.eps(0), projected.base(0), 100).value();
  EXPECT_LE(path_distance(reduced, projected), 1e-8);
}

TEST(Projection, InvariantUnderTheGroup) {
  const Fixture& f = fixture();
  Rng rng(47);
  const DiscretePath projected = project_path(f.model, f.path);
  for (const ReducedModel& m : {f.model, tb::make_se2_model(f.full)}) {
    const DiscretePath p = project_path(m, f.path);
    const GroupElement g = m.group().random(rng);
    DiscretePath moved(4, 4);
    for (const Vector& x : f.path.points()) moved.push_back(m.group_action.act(g, x));
    EXPECT_LE(path_distance(project_path(m, moved), p), 1e-10);
  }
  EXPECT_EQ(projected.size(), f.path.size());
}

TEST(Reconstruction, RoundTripAndEquivariance) {
  const Fixture& f = fixture();
  const DiscretePath projected = project_path(f.model, f.path);
  const Vector eps0 = f.path.eps(0), m1 = f.path.base(0);
  EXPECT_LE(path_distance(reconstruct_path(f.model, projected, eps0, m1), f.path), 1e-8);

  Rng rng(48);
  const GroupElement g = f.model.group().random(rng);
  const ActionModel& a = f.model.action_E;
  const DiscretePath moved = reconstruct_path(f.model, projected, a.act(g, eps0), a.act(g, m1));
  double gap = 0.0;
  for (std::size_t k = 0; k < moved.size(); ++k)
    gap = std::max(gap, inf_norm(Vector(moved[k] - f.model.group_action.act(g, f.path[k]))));
  EXPECT_LE(gap, 1e-8);
}

TEST(Reconstruction, MismatchedStartIsRejected) {
  const Fixture& f = fixture();
  const DiscretePath projected = project_path(f.model, f.path);
  EXPECT_THROW(reconstruct_path(f.model, projected, f.path.eps(0) * 2.0, f.path.base(0)), MatchingError);
}

TEST(Reconstruction, IndependentOfTheConnection) {
  const Fixture& f = fixture();
  Matrix M = Matrix::Identity(4, 4);
  M.topLeftCorner(2, 2) *= 2.0;
  const ReducedModel other = build_upsilon(tb::make_t2_connection_flat(M), f.full);
  const ReductionResult red = reduce(f.full, other);
  const DiscretePath projected = project_path(other, f.path);
  const DiscretePath reduced = simulate(red.system, projected.eps(0), projected.base(0), 100).value();
  EXPECT_LE(path_distance(reduced, projected), 1e-8);
  EXPECT_LE(path_distance(reconstruct_path(other, reduced, f.path.eps(0), f.path.base(0)), f.path), 1e-8);
  // Different connection, different reduced coordinates.
  EXPECT_GT(path_distance(projected, project_path(f.model, f.path)), 1e-6);
}

TEST(Stages, AgreeWithOneShotReduction) {
  const Fixture& f = fixture();
  Rng rng(49);
  const DiscretePath short_path = simulate(f.full, f.path.eps(0), f.path.base(0), 20).value();
  const StageReport main = two_stage(tb::make_staged_setup(f.cfg), short_path, rng);
  EXPECT_LE(main.max_violation, 1e-8);
  EXPECT_LE(main.conjugation_violation, 1e-10);
  EXPECT_EQ(main.per_step.size(), short_path.size());
  EXPECT_LE(two_stage(tb::make_staged_setup_h_is_g(f.cfg), short_path, rng).max_violation, 1e-10);
  EXPECT_LE(two_stage(tb::make_staged_setup_trivial_h(f.cfg), short_path, rng).max_violation, 1e-10);
}

TEST(Stages, SecondStageSystemsAgree) {
  const Fixture& f = fixture();
  const StagedSetup setup = tb::make_staged_setup(f.cfg);
  const StagedSystems s = reduce_in_stages(setup);
  const DiscretePath staged = project_path(s.by_GH.model, project_path(s.by_H.model, f.path));
  double res = 0.0;
  for (double r : path_residuals(s.by_GH.system, staged)) res = std::max(res, r);
  EXPECT_LE(res, 1e-8);
  const SmoothMap F = stage_map(setup);
  const DiscretePath direct = project_path(s.by_G.model, f.path);
  for (std::size_t k = 0; k < staged.size(); ++k) EXPECT_LT(inf_norm(Vector(F(staged[k]) - direct[k])), 1e-8);
}

TEST(Stages, BrokenSubgroupConnectionIsRejected) {
  const Fixture& f = fixture();
  StagedSetup setup = tb::make_staged_setup(f.cfg);
  const DiscreteConnection good = setup.conn_H;
  // Depends on absolute position, so it cannot commute with rotations.
  setup.conn_H = DiscreteConnection(good.quotient(), [good](const Vector& a, const Vector& b) {
    GroupElement g = good.ad(a, b);
    g.coords(0) += 0.3 * a(0);
    return g;
  });
  Rng rng(50);
  EXPECT_THROW(two_stage(setup, f.path, rng), ValidationError);
}

TEST(ResidualActions, GenericRealizationMatchesClosedForm) {
  const Fixture& f = fixture();
  const ResidualActions r =
      residual_actions(f.model, se2_planar_action(2), se2_planar_action(2), u1_group(), embed_rotation);
  Rng rng(51);
  const ActionModel E = tb::residual_action_E(), M = tb::residual_action_M();
  for (int i = 0; i < 50; ++i) {
    const GroupElement u = u1_group()->random(rng);
    const Vector e = random_normal(rng, 4), m = random_normal(rng, 2);
    EXPECT_LT(inf_norm(Vector(r.action_E.act(u, e) - E.act(u, e))), 1e-10);
    EXPECT_LT(inf_norm(Vector(r.action_M.act(u, m) - M.act(u, m))), 1e-10);
  }
}

TEST(ResidualActions, ReducedSystemIsSymmetric) {
  const Fixture& f = fixture();
  Rng rng(52);
  const SymmetryReport rep = check_symmetry(f.red.system, tb::residual_action_E(), tb::residual_action_M(),
                                            sample_c2(f.red.system, 50, rng), rng);
  EXPECT_LE(rep.lagrangian_invariance, 1e-10);
  EXPECT_LE(rep.ivcm_equivariance, 1e-8);
}

TEST(Morphism, UpsilonAndTranslationsAreMorphisms) {
  const Fixture& f = fixture();
  Rng rng(53);
  const std::vector<C2Point> samples = sample_c2(f.full, 30, rng);
  const MorphismReport up = check_morphism(f.model.upsilon, f.full, f.red.system, samples);
  EXPECT_TRUE(up.passes(1e-9));
  EXPECT_EQ(up.samples, 30);
  const GroupElement g = se2_group()->random(rng);
  const SmoothMap lg = translation_map(product_action(se2_planar_action(2), se2_planar_action(2)), g);
  EXPECT_TRUE(check_morphism(lg, f.full, f.full, samples).passes(1e-9));
}

TEST(Morphism, ShiftedCandidateBreaksLagrangianCondition) {
  const Fixture& f = fixture();
  const SmoothMap up = f.model.upsilon;
  const SmoothMap shifted(8, 6, [up](const Vector& x) {
    Vector y = up(x);
    y(2) += 0.1;
    return y;
  });
  Rng rng(54);
  const MorphismReport rep = check_morphism(shifted, f.full, f.red.system, sample_c2(f.full, 30, rng));
  EXPECT_GE(rep.cond5, 1e-2);
  EXPECT_LE(rep.cond3, 1e-9);
  EXPECT_LE(rep.cond4, 1e-9);
  EXPECT_LE(rep.cond6, 1e-9);
  EXPECT_FALSE(rep.passes(1e-9));
}
