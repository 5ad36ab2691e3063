#include "dlps/reduction.hpp"

#include <stdexcept>
#include <string>

namespace dlps {

namespace {

Eigen::Index numerical_rank(const Matrix& A, double rel_tol = 1e-8) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

std::vector<Vector> first_points(const std::vector<C2Point>& samples) {
  std::vector<Vector> out;
  for (const auto& s : samples) out.push_back(s.first);
  return out;
}

}  // namespace

SliceChart identity_slice(const QuotientModel& quotient) {
  return {quotient.base_dim, quotient.project, quotient.section};
}

ReducedModel identity_model(const DlpsSystem& sys) {
  const int n = sys.c1_dim();
  return {sys.bundle(),
          identity_map(n),
          identity_map(n),
          trivial_action(n),
          trivial_action(sys.e()),
          trivial_action(sys.m()),
          trivial_quotient(sys.m()),
          sys.bundle()};
}

ModelReport check_model(const ReducedModel& model, const std::vector<Vector>& c1_samples, Rng& rng) {
  ModelReport rep;
  rep.d1_min_rank = model.reduced_bundle.total_dim;
  const int e = model.source_bundle.total_dim, ep = model.reduced_bundle.total_dim;
  double worst = -1.0;
  for (const Vector& x : c1_samples) {
    const Vector y = model.upsilon(x);
    const GroupElement g = model.group().random(rng);
    const double inv = inf_norm(Vector(model.upsilon(model.group_action.act(g, x)) - y));
    const double sec = inf_norm(Vector(model.upsilon(model.lift_section(y)) - y));
    rep.upsilon_invariance = std::max(rep.upsilon_invariance, inv);
    rep.section_identity = std::max(rep.section_identity, sec);
    const Matrix D1 = model.upsilon.jacobian(x).topLeftCorner(ep, e);
    rep.d1_min_rank = std::min(rep.d1_min_rank, numerical_rank(D1));
    if (std::max(inv, sec) > worst) {
      worst = std::max(inv, sec);
      rep.worst_sample = x;
    }
    ++rep.samples;
  }
  return rep;
}

void validate_model(const ReducedModel& model, const std::vector<Vector>& c1_samples, Rng& rng, double tol) {
  const ModelReport rep = check_model(model, c1_samples, rng);
  if (rep.upsilon_invariance > tol) throw ValidationError("upsilon constant on orbits", rep.upsilon_invariance, rep.worst_sample);
  if (rep.section_identity > tol) throw ValidationError("upsilon o lift_section = id", rep.section_identity, rep.worst_sample);
  if (rep.d1_min_rank < model.reduced_bundle.total_dim || model.reduced_bundle.total_dim != model.source_bundle.total_dim) {
    throw SingularJacobian("D1(p1 o upsilon) is not an isomorphism (rank " + std::to_string(rep.d1_min_rank) + ")");
  }
}

SymmetryReport check_symmetry(const DlpsSystem& sys, const ActionModel& action_E, const ActionModel& action_M,
                              const std::vector<C2Point>& samples, Rng& rng) {
  SymmetryReport rep;
  const LieGroup& G = *action_E.group;
  for (const auto& [x0, x1] : samples) {
    const GroupElement g = G.random(rng);
    auto move = [&](const Vector& x) { return join(action_E.act(g, sys.eps(x)), action_M.act(g, sys.base(x))); };
    const Vector gx0 = move(x0), gx1 = move(x1);
    rep.lagrangian_invariance =
        std::max(rep.lagrangian_invariance, std::abs(sys.lagrangian_value(gx0) - sys.lagrangian_value(x0)));
    if (!sys.ivcm_is_zero()) {
      const Matrix lhs = sys.ivcm_matrix(gx0, gx1) * action_differential(action_E, g, sys.eps(x1));
      const Matrix rhs = action_differential(action_E, g, sys.eps(x0)) * sys.ivcm_matrix(x0, x1);
      rep.ivcm_equivariance = std::max(rep.ivcm_equivariance, inf_norm(Matrix(lhs - rhs)));
    }
    ++rep.samples;
  }
  return rep;
}

ReducedModel build_upsilon(const DiscreteConnection& conn, const DlpsSystem& sys, const ActionModel& action_E,
                           const SliceChart& slice, const ValidationOptions& opts) {
  const QuotientModel& Q = conn.quotient();
  const LieGroupPtr Gp = Q.action.group;
  const int e = sys.e(), m = sys.m(), b = Q.base_dim, g = Gp->dim();
  if (Q.total_dim != m) throw std::invalid_argument("build_upsilon: connection does not live on the base M");
  if (action_E.space_dim != e) throw std::invalid_argument("build_upsilon: action on E has wrong dimension");
  if (slice.dim + g != e) throw std::invalid_argument("build_upsilon: slice dimension + dim G must equal dim E");
  if (slice.dim < b) throw std::invalid_argument("build_upsilon: slice must carry the base coordinates");
  if (!Q.align && g > 0) throw std::invalid_argument("build_upsilon: quotient model needs an align map");
  const FiberBundleModel B = sys.bundle();
  const int sd = slice.dim;

  auto ups = [conn, Q, Gp, B, action_E, slice, e, m](const Vector& x) {
    const Vector eps0 = x.head(e), m1 = x.tail(m);
    const Vector m0 = B.phi(eps0);
    const GroupElement kappa = Q.align(m0);
    const GroupElement w = conn.ad(m0, m1);
    return join(slice.coords(action_E.act(kappa, eps0)), Gp->chart(conjugate(*Gp, kappa, w)), Q.project(m1));
  };
  auto lift = [conn, Q, Gp, B, slice, sd, g, b](const Vector& y) {
    const Vector eps0 = slice.point(y.head(sd));
    const GroupElement w = Gp->from_chart(y.segment(sd, g));
    const Vector m1 = Q.action.act(w, conn.horizontal_lift(B.phi(eps0), y.tail(b)));
    return join(eps0, m1);
  };

  const int ep = sd + g;
  ReducedModel model{FiberBundleModel::product(b, ep - b),
                     SmoothMap(e + m, ep + b, ups),
                     SmoothMap(ep + b, e + m, lift),
                     product_action(action_E, Q.action),
                     action_E,
                     Q.action,
                     Q,
                     B};

  if (opts.enabled) {
    Rng rng(opts.seed);
    const std::vector<C2Point> samples = sample_c2(sys, opts.samples, rng);
    const SymmetryReport sym = check_symmetry(sys, action_E, Q.action, samples, rng);
    if (sym.lagrangian_invariance > opts.tol) throw ValidationError("L_d invariance", sym.lagrangian_invariance);
    if (sym.ivcm_equivariance > 1e3 * opts.tol) throw ValidationError("IVCM equivariance", sym.ivcm_equivariance);
    validate_model(model, first_points(samples), rng, opts.tol);
  }
  return model;
}

ReducedModel build_upsilon(const DiscreteConnection& conn, const DlpsSystem& sys, const ValidationOptions& opts) {
  if (sys.bundle().kind != BundleKind::Identity) throw std::invalid_argument("build_upsilon: system is not a DMS");
  return build_upsilon(conn, sys, conn.quotient().action, identity_slice(conn.quotient()), opts);
}

C2Point lift_c2(const ReducedModel& model, const Vector& y0, const Vector& y1) {
  const int e = model.source_bundle.total_dim, m = model.source_bundle.base_dim;
  const Vector x0 = model.lift_section(y0);
  const Vector x1p = model.lift_section(y1);
  const Vector m1 = x0.tail(m);
  const GroupElement g = model.base_quotient.matching_element(m1, model.source_bundle.phi(x1p.head(e)));
  return {x0, model.group_action.act(g, x1p)};
}

Matrix reduced_ivcm_at(const ReducedModel& model, const DlpsSystem& sys, const Vector& x0, const Vector& x1,
                       bool* used_pseudo_inverse) {
  const int e = sys.e(), m = sys.m(), ep = model.reduced_bundle.total_dim;
  const Matrix J0 = model.upsilon.jacobian(x0);
  const Matrix D1_0 = J0.topLeftCorner(ep, e);
  const Matrix D2_0 = J0.topRightCorner(ep, m);
  const Matrix D1_1 = model.upsilon.jacobian(x1).topLeftCorner(ep, e);
  const Matrix A = D1_0 * sys.ivcm_matrix(x0, x1) + D2_0 * sys.bundle().phi.jacobian(sys.eps(x1));
  // result = A * D1_1^-1, solved through the transpose.
  Eigen::FullPivLU<Matrix> lu(D1_1.transpose());
  lu.setThreshold(kRankThreshold);
  if (used_pseudo_inverse) *used_pseudo_inverse = false;
  if (D1_1.rows() == D1_1.cols() && lu.isInvertible()) return lu.solve(A.transpose()).transpose();
  if (used_pseudo_inverse) *used_pseudo_inverse = true;
  return A * Eigen::CompleteOrthogonalDecomposition<Matrix>(D1_1).pseudoInverse();
}

ReductionResult reduce(const DlpsSystem& sys, const ReducedModel& model, const ValidationOptions& opts) {
  if (model.source_c1_dim() != sys.c1_dim()) throw std::invalid_argument("reduce: model does not match the system");
  if (model.reduced_bundle.total_dim != sys.e()) {
    throw std::invalid_argument("reduce: reduced total space must have the dimension of E");
  }
  const SmoothMap reduced_lagrangian = compose(sys.lagrangian(), model.lift_section);
  auto flagged = std::make_shared<std::atomic<long>>(0);

  IvcmFn ivcm;
  if (model.group().dim() == 0) {
    if (!sys.ivcm_is_zero()) ivcm = [sys](const Vector& x0, const Vector& x1) { return sys.ivcm_matrix(x0, x1); };
  } else {
    ivcm = [sys, model, flagged](const Vector& y0, const Vector& y1) {
      const auto [x0, x1] = lift_c2(model, y0, y1);
      bool pinv = false;
      Matrix D = reduced_ivcm_at(model, sys, x0, x1, &pinv);
      if (pinv) ++*flagged;
      return D;
    };
  }
  C2Sampler sampler;
  if (sys.has_sampler()) {
    sampler = [sys, ups = model.upsilon](Rng& rng) {
      const auto [x0, x1] = sys.sample_c2(rng);
      return C2Point{ups(x0), ups(x1)};
    };
  }
  ReductionResult out{DlpsSystem(model.reduced_bundle, reduced_lagrangian, ivcm, sampler), model, flagged};

  if (opts.enabled && sys.has_sampler()) {
    Rng rng(opts.seed);
    const std::vector<C2Point> samples = sample_c2(sys, opts.samples, rng);
    const std::vector<Vector> pts = first_points(samples);
    validate_model(model, pts, rng, opts.tol);
    for (const Vector& x : pts) {
      const double v = std::abs(out.system.lagrangian_value(model.upsilon(x)) - sys.lagrangian_value(x));
      if (v > opts.tol) throw ValidationError("reduced Lagrangian o upsilon = L_d", v, x);
    }
  }
  return out;
}

DiscretePath project_path(const ReducedModel& model, const DiscretePath& path) {
  DiscretePath out(model.reduced_bundle.total_dim, model.reduced_bundle.base_dim);
  for (const Vector& x : path.points()) out.push_back(model.upsilon(x));
  return out;
}

DiscretePath reconstruct_path(const ReducedModel& model, const DiscretePath& reduced, const Vector& eps0,
                              const Vector& m1) {
  const FiberBundleModel& B = model.source_bundle;
  DiscretePath out(B.total_dim, B.base_dim);
  if (reduced.empty()) return out;
  const Vector x0 = join(eps0, m1);
  const double miss = inf_norm(Vector(model.upsilon(x0) - reduced[0]));
  if (miss > 1e-9 * (1.0 + inf_norm(reduced[0]))) {
    throw MatchingError("reconstruct_path: start does not project to the first reduced pair (miss " +
                        std::to_string(miss) + ")");
  }
  out.push_back(x0);
  for (std::size_t k = 1; k < reduced.size(); ++k) {
    const Vector xp = model.lift_section(reduced[k]);
    const GroupElement g = model.base_quotient.matching_element(out.base(k - 1), B.phi(xp.head(B.total_dim)));
    out.push_back(model.group_action.act(g, xp));
  }
  return out;
}

ResidualActions residual_actions(const ReducedModel& model_H, const ActionModel& g_action_E,
                                 const ActionModel& g_action_M, LieGroupPtr quotient_group,
                                 std::function<GroupElement(const GroupElement&)> lift_to_G) {
  const ActionModel g_c1 = product_action(g_action_E, g_action_M);
  auto through = [model_H, g_c1, lift_to_G](const GroupElement& k, const Vector& y) {
    return Vector(model_H.upsilon(g_c1.act(lift_to_G(k), model_H.lift_section(y))));
  };
  const FiberBundleModel RB = model_H.reduced_bundle;
  const int ep = RB.total_dim, mp = RB.base_dim;
  ResidualActions out;
  out.action_E = {quotient_group, ep, [through, RB, ep](const GroupElement& k, const Vector& v) {
                    return Vector(through(k, join(v, RB.phi(v))).head(ep));
                  }};
  out.action_M = {quotient_group, mp, [through, RB, mp](const GroupElement& k, const Vector& r) {
                    return Vector(through(k, join(RB.section(r), r)).tail(mp));
                  }};
  out.action_C1 = {quotient_group, ep + mp, through};
  return out;
}

StagedSystems reduce_in_stages(const StagedSetup& setup, const ValidationOptions& opts) {
  ReductionResult by_H = reduce(setup.system, setup.model_H, opts);
  ReductionResult by_GH = reduce(by_H.system, setup.model_GH, opts);
  ReductionResult by_G = reduce(setup.system, setup.model_G, opts);
  return {std::move(by_H), std::move(by_GH), std::move(by_G)};
}

SmoothMap stage_map(const StagedSetup& setup) {
  const ReducedModel H = setup.model_H, GH = setup.model_GH, G = setup.model_G;
  return SmoothMap(GH.target_c1_dim(), G.target_c1_dim(),
                   [H, GH, G](const Vector& y) { return G.upsilon(H.lift_section(GH.lift_section(y))); });
}

StageReport two_stage(const StagedSetup& setup, const DiscretePath& trajectory, Rng& rng, int conjugation_samples,
                      double conjugation_tol) {
  StageReport rep;
  const auto pairs = sample_pairs(setup.conn_H.quotient(), conjugation_samples, rng);
  const EquivarianceReport conj =
      check_conjugation_equivariance(setup.conn_H, setup.action_G_on_M, setup.embed_H, pairs, rng);
  rep.conjugation_violation = conj.max_violation;
  if (conj.max_violation > conjugation_tol) {
    throw ValidationError("conjugation law g A_d(q0,q1) g^-1 for the H-connection", conj.max_violation,
                          join(conj.worst_q0, conj.worst_q1));
  }
  const SmoothMap F = stage_map(setup);
  for (const Vector& x : trajectory.points()) {
    const Vector y_gh = setup.model_GH.upsilon(setup.model_H.upsilon(x));
    const Vector y_g = setup.model_G.upsilon(x);
    const double v = inf_norm(Vector(F(y_gh) - y_g));
    rep.per_step.push_back(v);
    rep.max_violation = std::max(rep.max_violation, v);
  }
  return rep;
}

MorphismReport check_morphism(const SmoothMap& candidate, const DlpsSystem& sys, const DlpsSystem& target,
                              const std::vector<C2Point>& samples) {
  const int e = sys.e(), m = sys.m(), ep = target.e(), mp = target.m();
  if (candidate.in_dim() != e + m || candidate.out_dim() != ep + mp) {
    throw std::invalid_argument("check_morphism: candidate dimensions do not match the systems");
  }
  MorphismReport rep;
  rep.full_rank_min = ep + mp;
  rep.d1_rank_min = ep;
  for (const auto& [x0, x1] : samples) {
    const Vector y0 = candidate(x0), y1 = candidate(x1);
    const Matrix J0 = candidate.jacobian(x0), J1 = candidate.jacobian(x1);
    rep.full_rank_min = std::min(rep.full_rank_min, numerical_rank(J0));
    rep.d1_rank_min = std::min(rep.d1_rank_min, numerical_rank(J0.topLeftCorner(ep, e)));
    rep.cond3 = std::max({rep.cond3, inf_norm(Matrix(J0.bottomLeftCorner(mp, e))),
                          inf_norm(Matrix(J1.bottomLeftCorner(mp, e)))});
    rep.cond4 = std::max(rep.cond4, inf_norm(Vector(y0.tail(mp) - target.bundle().phi(y1.head(ep)))));
    rep.cond5 = std::max({rep.cond5, std::abs(sys.lagrangian_value(x0) - target.lagrangian_value(y0)),
                          std::abs(sys.lagrangian_value(x1) - target.lagrangian_value(y1))});
    const Matrix lhs = target.ivcm_matrix(y0, y1) * J1.topLeftCorner(ep, e);
    const Matrix rhs = J0.topLeftCorner(ep, e) * sys.ivcm_matrix(x0, x1) +
                       J0.topRightCorner(ep, m) * sys.bundle().phi.jacobian(sys.eps(x1));
    rep.cond6 = std::max(rep.cond6, inf_norm(Matrix(lhs - rhs)));
    ++rep.samples;
  }
  rep.cond1_rank_ok = rep.full_rank_min == ep + mp;
  rep.cond2_ok = rep.d1_rank_min == ep;
  return rep;
}

SmoothMap translation_map(const ActionModel& c1_action, const GroupElement& g) {
  return SmoothMap(c1_action.space_dim, c1_action.space_dim,
                   [c1_action, g](const Vector& x) { return c1_action.act(g, x); });
}

std::vector<C2Point> sample_c2(const DlpsSystem& sys, int n, Rng& rng) {
  std::vector<C2Point> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(sys.sample_c2(rng));
  return out;
}

std::vector<C2Point> path_c2(const DiscretePath& path) {
  std::vector<C2Point> out;
  for (std::size_t k = 1; k < path.size(); ++k) out.emplace_back(path[k - 1], path[k]);
  return out;
}

}  // namespace dlps
