#include "dlps/connection.hpp"

#include <limits>
#include <stdexcept>

namespace dlps {

GroupElement QuotientModel::matching_element(const Vector& target, const Vector& source, double tol) const {
  const LieGroup& G = group();
  GroupElement g = G.identity();
  if (align) {
    g = G.compose(G.inverse(align(target)), align(source));
  } else if (G.dim() != 0) {
    throw MatchingError("matching_element: quotient model has no align map");
  }
  const double miss = inf_norm(Vector(action.act(g, source) - target));
  if (miss > tol * (1.0 + inf_norm(target))) {
    throw MatchingError("matching_element: points are not on one orbit (miss " + std::to_string(miss) + ")");
  }
  return g;
}

QuotientModel trivial_quotient(int n, PointSampler sample) {
  QuotientModel q;
  q.total_dim = n;
  q.base_dim = n;
  q.project = identity_map(n);
  q.section = identity_map(n);
  q.action = trivial_action(n);
  q.align = [](const Vector&) { return trivial_group()->identity(); };
  q.sample = std::move(sample);
  return q;
}

QuotientReport check_quotient(const QuotientModel& model, int n_samples, Rng& rng) {
  QuotientReport rep;
  const LieGroup& G = model.group();
  for (int i = 0; i < n_samples; ++i) {
    const Vector q = model.sample(rng);
    const Vector r = model.project(q);
    const GroupElement g = G.random(rng);
    rep.invariance_violation =
        std::max(rep.invariance_violation, inf_norm(Vector(model.project(model.action.act(g, q)) - r)));
    rep.section_violation = std::max(rep.section_violation, inf_norm(Vector(model.project(model.section(r)) - r)));
    if (model.align) {
      rep.align_violation = std::max(
          rep.align_violation, inf_norm(Vector(model.action.act(model.align(q), q) - model.section(r))));
    }
  }
  return rep;
}

DiscreteConnection::DiscreteConnection(QuotientModel quotient, AdFn ad, LiftFn lift)
    : quotient_(std::move(quotient)), ad_(std::move(ad)), lift_(std::move(lift)) {
  if (!ad_) throw std::invalid_argument("DiscreteConnection: missing connection form");
}

GroupElement DiscreteConnection::ad(const Vector& q0, const Vector& q1) const {
  if (q0.size() != quotient_.total_dim || q1.size() != quotient_.total_dim) {
    throw std::invalid_argument("DiscreteConnection::ad: point has wrong dimension");
  }
  return ad_(q0, q1);
}

Vector DiscreteConnection::horizontal_lift(const Vector& q0, const Vector& r1) const {
  if (q0.size() != quotient_.total_dim || r1.size() != quotient_.base_dim) {
    throw std::invalid_argument("DiscreteConnection::horizontal_lift: wrong dimension");
  }
  if (lift_) return lift_(q0, r1);
  const LieGroup& G = group();
  Vector s = quotient_.section(r1);
  if (quotient_.align) s = quotient_.action.act(G.inverse(quotient_.align(q0)), s);
  return quotient_.action.act(G.inverse(ad_(q0, s)), s);
}

GroupElement ad(const DiscreteConnection& conn, const Vector& q0, const Vector& q1) { return conn.ad(q0, q1); }

Vector horizontal_lift(const DiscreteConnection& conn, const Vector& q0, const Vector& r1) {
  return conn.horizontal_lift(q0, r1);
}

DiscreteConnection mechanical_connection_flat(const Matrix& metric, const QuotientModel& quotient) {
  const int n = quotient.total_dim;
  if (metric.rows() != n || metric.cols() != n) throw std::invalid_argument("mechanical_connection_flat: metric shape");
  if (!metric.isApprox(metric.transpose(), 1e-14)) throw std::invalid_argument("mechanical_connection_flat: metric not symmetric");
  if (Eigen::LLT<Matrix>(metric).info() != Eigen::Success) {
    throw std::invalid_argument("mechanical_connection_flat: metric not positive definite");
  }
  auto ad_fn = [metric, quotient](const Vector& q0, const Vector& q1) {
    const LieGroup& G = quotient.group();
    const int d = G.dim();
    const Matrix W = generator_matrix(quotient.action, q0).transpose() * metric;
    const SmoothMap horizontality(d, d, [&](const Vector& c) {
      return Vector(W * (quotient.action.act(G.inverse(G.from_chart(c)), q1) - q0));
    });
    const double scale = 1.0 + inf_norm(q0) + inf_norm(q1);
    NewtonConfig cfg;
    cfg.residual_tol = 1e-14 * scale * scale;
    try {
      return G.from_chart(newton_solve(horizontality, Vector::Zero(d), cfg).x);
    } catch (const NonConvergence& e) {
      throw DomainError(std::string("mechanical_connection_flat: horizontality not solvable: ") + e.what());
    } catch (const SingularJacobian& e) {
      throw DomainError(std::string("mechanical_connection_flat: degenerate orbit: ") + e.what());
    }
  };
  return DiscreteConnection(quotient, ad_fn);
}

DiscreteConnection trivial_connection(const QuotientModel& quotient) {
  if (quotient.group().dim() != 0) throw std::invalid_argument("trivial_connection: group is not trivial");
  return DiscreteConnection(
      quotient, [](const Vector&, const Vector&) { return trivial_group()->identity(); },
      [quotient](const Vector&, const Vector& r1) { return quotient.section(r1); });
}

std::vector<PairSample> sample_pairs(const QuotientModel& quotient, int n, Rng& rng, double step_scale) {
  if (!quotient.sample) throw std::invalid_argument("sample_pairs: quotient model has no sampler");
  std::vector<PairSample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vector q0 = quotient.sample(rng);
    out.emplace_back(q0, q0 + random_normal(rng, quotient.total_dim, step_scale));
  }
  return out;
}

namespace {

void record(EquivarianceReport& rep, double v, const Vector& q0, const Vector& q1) {
  ++rep.samples;
  if (rep.samples == 1 || v > rep.max_violation) {
    rep.max_violation = v;
    rep.worst_q0 = q0;
    rep.worst_q1 = q1;
  }
}

double evaluate_or_inf(const std::function<double()>& f) {
  try {
    return f();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

EquivarianceReport check_equivariance(const DiscreteConnection& conn, const std::vector<PairSample>& samples, Rng& rng) {
  EquivarianceReport rep;
  const LieGroup& G = conn.group();
  const ActionModel& A = conn.quotient().action;
  for (const auto& [q0, q1] : samples) {
    const GroupElement g0 = G.random(rng), g1 = G.random(rng);
    const double v = evaluate_or_inf([&] {
      const GroupElement lhs = conn.ad(A.act(g0, q0), A.act(g1, q1));
      const GroupElement rhs = G.compose(G.compose(g1, conn.ad(q0, q1)), G.inverse(g0));
      return group_distance(lhs, rhs);
    });
    record(rep, v, q0, q1);
  }
  return rep;
}

EquivarianceReport check_equivariance(const DiscreteConnection& conn, int n_samples, Rng& rng) {
  return check_equivariance(conn, sample_pairs(conn.quotient(), n_samples, rng), rng);
}

EquivarianceReport check_conjugation_equivariance(const DiscreteConnection& conn_H, const ActionModel& action_G,
                                                  const std::function<GroupElement(const GroupElement&)>& embed_H,
                                                  const std::vector<PairSample>& samples, Rng& rng) {
  EquivarianceReport rep;
  const LieGroup& G = *action_G.group;
  for (const auto& [q0, q1] : samples) {
    const GroupElement g = G.random(rng);
    const double v = evaluate_or_inf([&] {
      const GroupElement lhs = embed_H(conn_H.ad(action_G.act(g, q0), action_G.act(g, q1)));
      const GroupElement rhs = conjugate(G, g, embed_H(conn_H.ad(q0, q1)));
      return group_distance(lhs, rhs);
    });
    record(rep, v, q0, q1);
  }
  return rep;
}

double connection_distance(const DiscreteConnection& a, const DiscreteConnection& b,
                           const std::vector<PairSample>& samples) {
  double worst = 0.0;
  for (const auto& [q0, q1] : samples) worst = std::max(worst, group_distance(a.ad(q0, q1), b.ad(q0, q1)));
  return worst;
}

}  // namespace dlps
