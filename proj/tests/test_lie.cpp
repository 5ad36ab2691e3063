#include <gtest/gtest.h>

#include <complex>

#include "dlps/lie.hpp"

using namespace dlps;
using Complex = std::complex<double>;

namespace {

GroupElement se2(Complex A, Complex v) {
  GroupElement g{Vector(4)};
  g.coords << A.real(), A.imag(), v.real(), v.imag();
  return g;
}

GroupElement u1(Complex A) {
  GroupElement g{Vector(2)};
  g.coords << A.real(), A.imag();
  return g;
}

Vector plane_sample(Rng& rng, int n) { return random_normal(rng, n, 1.5); }

}  // namespace

TEST(SE2, ComposeMatchesProductFormula) {
  const auto G = se2_group();
  const GroupElement g = G->compose(se2({0, 1}, {1, 0}), se2({1, 0}, {2, 0}));
  EXPECT_LT(group_distance(g, se2({0, 1}, {1, 2})), 1e-15);
}

TEST(SE2, IdentityAndInverse) {
  const auto G = se2_group();
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const GroupElement g = G->random(rng);
    EXPECT_LT(group_distance(G->compose(G->identity(), g), g), 1e-15);
    EXPECT_LT(group_distance(G->compose(g, G->inverse(g)), G->identity()), 1e-12);
  }
}

TEST(Groups, AxiomsHoldForAllShippedGroups) {
  Rng rng(2);
  for (const LieGroupPtr& G : {se2_group(), u1_group(), t2_group(), translation_group(3), trivial_group()}) {
    const GroupAxiomReport rep = check_group_axioms(*G, 100, rng);
    EXPECT_LE(rep.inverse_violation, 1e-12) << G->name();
    EXPECT_LE(rep.associativity_violation, 1e-12) << G->name();
  }
}

TEST(Groups, ChartRoundTrip) {
  Rng rng(3);
  for (const LieGroupPtr& G : {se2_group(), u1_group(), t2_group()}) {
    EXPECT_LT(inf_norm(G->chart(G->identity())), 1e-15);
    for (int i = 0; i < 20; ++i) {
      const GroupElement g = G->random(rng);
      EXPECT_LT(group_distance(G->from_chart(G->chart(g)), g), 1e-12) << G->name();
    }
  }
}

TEST(SE2, RenormalizationKeepsUnitRotation) {
  const auto G = se2_group();
  Rng rng(4);
  GroupElement g = G->identity();
  for (int i = 0; i < 10000; ++i) g = G->compose(g, G->random(rng));
  EXPECT_LE(std::abs(g.coords(0) * g.coords(0) + g.coords(1) * g.coords(1) - 1.0), 1e-12);
}

TEST(Conjugate, IdentityConjugationIsTrivial) {
  const auto G = se2_group();
  const GroupElement h = se2(std::polar(1.0, 0.7), {0.3, -2});
  EXPECT_LT(group_distance(conjugate(*G, G->identity(), h), h), 1e-15);
}

TEST(Conjugate, TranslationsCommute) {
  const auto G = se2_group();
  EXPECT_LT(group_distance(conjugate(*G, se2(1, {2, 5}), se2(1, {-1, 3})), se2(1, {-1, 3})), 1e-15);
}

TEST(Conjugate, RotationActsOnTranslation) {
  const auto G = se2_group();
  const Complex A = std::polar(1.0, 1.1), u(0.5, -2.0);
  EXPECT_LT(group_distance(conjugate(*G, se2(A, 0), se2(1, u)), se2(1, A * u)), 1e-14);
}

TEST(Conjugate, TranslationsFormANormalSubgroup) {
  const auto G = se2_group();
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const GroupElement h = embed_translation(t2_group()->random(rng));
    const GroupElement c = conjugate(*G, G->random(rng), h);
    EXPECT_NEAR(c.coords(0), 1.0, 1e-15);
    EXPECT_NEAR(c.coords(1), 0.0, 1e-15);
  }
}

TEST(Generators, TranslationShiftsBothParticles) {
  Rng rng(6);
  const Vector q = random_normal(rng, 4);
  Vector expected(4);
  expected << 1, 0, 1, 0;
  EXPECT_LT(inf_norm(Vector(infinitesimal_generator(t2_planar_action(2), 0, q) - expected)), 1e-10);
}

TEST(Generators, RotationAtOneIsI) {
  Vector z(2);
  z << 1, 0;
  Vector expected(2);
  expected << 0, 1;
  EXPECT_LT(inf_norm(Vector(infinitesimal_generator(u1_planar_action(1), 0, z) - expected)), 1e-10);
  EXPECT_LT(inf_norm(Vector(infinitesimal_generator(se2_planar_action(1), 0, z) - expected)), 1e-10);
}

TEST(Generators, FixedPointGivesZero) {
  EXPECT_LT(inf_norm(infinitesimal_generator(u1_planar_action(1), 0, Vector::Zero(2))), 1e-14);
}

TEST(Generators, MatrixMatchesClosedFormForSE2) {
  // Generators of (theta, v) at a point z: (i z, 1, i).
  Vector z(2);
  z << 0.3, -1.2;
  Matrix expected(2, 3);
  expected << 1.2, 1, 0, 0.3, 0, 1;
  EXPECT_LT(inf_norm(Matrix(generator_matrix(se2_planar_action(1), z) - expected)), 1e-10);
}

TEST(Quotient, ProjectionKeepsRotation) {
  EXPECT_LT(group_distance(project_to_quotient(se2(1, {4, -2})), u1_group()->identity()), 1e-15);
  EXPECT_LT(group_distance(project_to_quotient(se2({0, 1}, {3, 4})), u1({0, 1})), 1e-15);
}

TEST(Quotient, ProjectionIsAHomomorphism) {
  const auto G = se2_group();
  const auto U = u1_group();
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const GroupElement a = G->random(rng), b = G->random(rng);
    const GroupElement lhs = project_to_quotient(G->compose(a, b));
    const GroupElement rhs = U->compose(project_to_quotient(a), project_to_quotient(b));
    EXPECT_LT(group_distance(lhs, rhs), 1e-12);
  }
}

TEST(Actions, AxiomsHoldForAllShippedActions) {
  Rng rng(8);
  const std::vector<ActionModel> actions = {se2_planar_action(2), t2_planar_action(2), u1_planar_action(2),
                                            translation_action(3, 2), trivial_action(5),
                                            product_action(se2_planar_action(2), se2_planar_action(2))};
  for (const ActionModel& a : actions) {
    const int n = a.space_dim;
    const ActionAxiomReport rep = check_action_axioms(a, [n](Rng& r) { return plane_sample(r, n); }, 200, rng);
    EXPECT_LE(rep.identity_violation, 1e-12) << a.group->name();
    EXPECT_LE(rep.compatibility_violation, 1e-12) << a.group->name();
  }
}

TEST(Actions, PullbackThroughEmbedding) {
  const ActionModel rot = pullback_action(se2_planar_action(1), u1_group(), embed_rotation);
  Vector z(2);
  z << 2, 0;
  Vector expected(2);
  expected << 0, 2;
  EXPECT_LT(inf_norm(Vector(rot.act(u1({0, 1}), z) - expected)), 1e-15);
}

TEST(Actions, RejectsWrongDimension) {
  EXPECT_THROW(se2_planar_action(2).act(se2_group()->identity(), Vector::Zero(3)), std::invalid_argument);
}
