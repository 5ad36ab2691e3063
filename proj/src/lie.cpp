#include "dlps/lie.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace dlps {

namespace {

using Complex = std::complex<double>;

Complex cplx(const Vector& v, int i) { return {v(i), v(i + 1)}; }

void put(Vector& v, int i, Complex z) {
  v(i) = z.real();
  v(i + 1) = z.imag();
}

Complex unit(Complex a) {
  const double r = std::abs(a);
  if (!(r > 0.0)) throw DomainError("rotation part has zero modulus");
  return a / r;
}

void check_coords(const LieGroup& G, const GroupElement& g) {
  if (g.coords.size() != G.coord_size()) {
    throw std::invalid_argument(G.name() + ": element has " + std::to_string(g.coords.size()) + " coordinates, expected " +
                                std::to_string(G.coord_size()));
  }
}

double uniform_angle(Rng& rng) {
  std::uniform_real_distribution<double> d(-std::numbers::pi, std::numbers::pi);
  return d(rng);
}

class SE2Group final : public LieGroup {
 public:
  std::string name() const override { return "SE(2)"; }
  int dim() const override { return 3; }
  int coord_size() const override { return 4; }
  GroupElement identity() const override { return make({1.0, 0.0}, {0.0, 0.0}); }

  GroupElement compose(const GroupElement& a, const GroupElement& b) const override {
    check_coords(*this, a);
    check_coords(*this, b);
    const Complex A1 = cplx(a.coords, 0), v1 = cplx(a.coords, 2);
    const Complex A2 = cplx(b.coords, 0), v2 = cplx(b.coords, 2);
    return make(unit(A1 * A2), A1 * v2 + v1);
  }

  GroupElement inverse(const GroupElement& g) const override {
    check_coords(*this, g);
    const Complex A = cplx(g.coords, 0), v = cplx(g.coords, 2);
    const Complex Ai = std::conj(A) / std::norm(A);
    return make(unit(Ai), -Ai * v);
  }

  // Closed-form screw: xi = (omega, u) -> (e^{i omega}, (e^{i omega} - 1)/(i omega) u).
  GroupElement exp_small(const Vector& xi) const override {
    if (xi.size() != 3) throw std::invalid_argument("SE(2) exp_small: expected 3 algebra coordinates");
    const double w = xi(0);
    const Complex u(xi(1), xi(2));
    Complex factor;
    if (std::abs(w) < 1e-8) {
      factor = Complex(1.0 - w * w / 6.0, w / 2.0);
    } else {
      factor = Complex(std::sin(w) / w, (1.0 - std::cos(w)) / w);
    }
    return make(std::polar(1.0, w), factor * u);
  }

  Vector chart(const GroupElement& g) const override {
    check_coords(*this, g);
    Vector c(3);
    c << std::atan2(g.coords(1), g.coords(0)), g.coords(2), g.coords(3);
    return c;
  }

  GroupElement from_chart(const Vector& c) const override {
    if (c.size() != 3) throw std::invalid_argument("SE(2) from_chart: expected 3 coordinates");
    return make(std::polar(1.0, c(0)), {c(1), c(2)});
  }

  GroupElement random(Rng& rng) const override {
    const Vector v = random_normal(rng, 2, 2.0);
    return make(std::polar(1.0, uniform_angle(rng)), {v(0), v(1)});
  }

  static GroupElement make(Complex A, Complex v) {
    GroupElement g{Vector(4)};
    put(g.coords, 0, A);
    put(g.coords, 2, v);
    return g;
  }
};

class U1Group final : public LieGroup {
 public:
  std::string name() const override { return "U(1)"; }
  int dim() const override { return 1; }
  int coord_size() const override { return 2; }
  GroupElement identity() const override { return make({1.0, 0.0}); }

  GroupElement compose(const GroupElement& a, const GroupElement& b) const override {
    check_coords(*this, a);
    check_coords(*this, b);
    return make(unit(cplx(a.coords, 0) * cplx(b.coords, 0)));
  }

  GroupElement inverse(const GroupElement& g) const override {
    check_coords(*this, g);
    return make(unit(std::conj(cplx(g.coords, 0))));
  }

  GroupElement exp_small(const Vector& xi) const override {
    if (xi.size() != 1) throw std::invalid_argument("U(1) exp_small: expected 1 algebra coordinate");
    return make(std::polar(1.0, xi(0)));
  }

  Vector chart(const GroupElement& g) const override {
    check_coords(*this, g);
    return Vector::Constant(1, std::atan2(g.coords(1), g.coords(0)));
  }

  GroupElement from_chart(const Vector& c) const override {
    if (c.size() != 1) throw std::invalid_argument("U(1) from_chart: expected 1 coordinate");
    return make(std::polar(1.0, c(0)));
  }

  GroupElement random(Rng& rng) const override { return make(std::polar(1.0, uniform_angle(rng))); }

  static GroupElement make(Complex A) {
    GroupElement g{Vector(2)};
    put(g.coords, 0, A);
    return g;
  }
};

class TranslationGroup final : public LieGroup {
 public:
  explicit TranslationGroup(int n) : n_(n) {}
  std::string name() const override { return "T" + std::to_string(n_); }
  int dim() const override { return n_; }
  int coord_size() const override { return n_; }
  GroupElement identity() const override { return {Vector::Zero(n_)}; }
  GroupElement compose(const GroupElement& a, const GroupElement& b) const override {
    check_coords(*this, a);
    check_coords(*this, b);
    return {a.coords + b.coords};
  }
  GroupElement inverse(const GroupElement& g) const override {
    check_coords(*this, g);
    return {-g.coords};
  }
  GroupElement exp_small(const Vector& xi) const override {
    if (xi.size() != n_) throw std::invalid_argument(name() + " exp_small: wrong algebra dimension");
    return {xi};
  }
  Vector chart(const GroupElement& g) const override {
    check_coords(*this, g);
    return g.coords;
  }
  GroupElement from_chart(const Vector& c) const override { return exp_small(c); }
  GroupElement random(Rng& rng) const override { return {random_normal(rng, n_, 2.0)}; }

 private:
  int n_;
};

class TrivialGroup final : public LieGroup {
 public:
  std::string name() const override { return "{e}"; }
  int dim() const override { return 0; }
  int coord_size() const override { return 0; }
  GroupElement identity() const override { return {Vector(0)}; }
  GroupElement compose(const GroupElement&, const GroupElement&) const override { return identity(); }
  GroupElement inverse(const GroupElement&) const override { return identity(); }
  GroupElement exp_small(const Vector&) const override { return identity(); }
  Vector chart(const GroupElement&) const override { return Vector(0); }
  GroupElement from_chart(const Vector&) const override { return identity(); }
  GroupElement random(Rng&) const override { return identity(); }
};

}  // namespace

LieGroupPtr se2_group() {
  static const LieGroupPtr g = std::make_shared<SE2Group>();
  return g;
}

LieGroupPtr u1_group() {
  static const LieGroupPtr g = std::make_shared<U1Group>();
  return g;
}

LieGroupPtr translation_group(int n) {
  if (n < 1) throw std::invalid_argument("translation_group: dimension must be positive");
  return std::make_shared<TranslationGroup>(n);
}

LieGroupPtr trivial_group() {
  static const LieGroupPtr g = std::make_shared<TrivialGroup>();
  return g;
}

GroupElement compose(const LieGroup& G, const GroupElement& a, const GroupElement& b) { return G.compose(a, b); }

GroupElement inverse(const LieGroup& G, const GroupElement& g) { return G.inverse(g); }

GroupElement conjugate(const LieGroup& G, const GroupElement& g, const GroupElement& h) {
  return G.compose(G.compose(g, h), G.inverse(g));
}

double group_distance(const GroupElement& a, const GroupElement& b) {
  if (a.coords.size() != b.coords.size()) throw std::invalid_argument("group_distance: coordinate size mismatch");
  return inf_norm(Vector(a.coords - b.coords));
}

GroupElement random_near_identity(const LieGroup& G, Rng& rng, double scale) {
  return G.from_chart(random_normal(rng, G.dim(), scale));
}

GroupElement project_to_quotient(const GroupElement& g) {
  if (g.coords.size() != 4) throw std::invalid_argument("project_to_quotient: expected an SE(2) element");
  return U1Group::make(unit(cplx(g.coords, 0)));
}

GroupElement embed_translation(const GroupElement& t) {
  if (t.coords.size() != 2) throw std::invalid_argument("embed_translation: expected a T2 element");
  return SE2Group::make({1.0, 0.0}, cplx(t.coords, 0));
}

GroupElement embed_rotation(const GroupElement& a) {
  if (a.coords.size() != 2) throw std::invalid_argument("embed_rotation: expected a U(1) element");
  return SE2Group::make(unit(cplx(a.coords, 0)), {0.0, 0.0});
}

Vector ActionModel::act(const GroupElement& g, const Vector& q) const {
  if (q.size() != space_dim) throw std::invalid_argument("ActionModel: point has wrong dimension");
  return act_fn(g, q);
}

Vector infinitesimal_generator(const ActionModel& action, int xi_index, const Vector& q) {
  const LieGroup& G = *action.group;
  if (xi_index < 0 || xi_index >= G.dim()) throw std::out_of_range("infinitesimal_generator: bad algebra index");
  const double t = std::pow(kEps, 0.2);
  auto curve = [&](double s) {
    Vector xi = Vector::Zero(G.dim());
    xi(xi_index) = s;
    return action.act(G.exp_small(xi), q);
  };
  return (curve(-2 * t) - 8.0 * curve(-t) + 8.0 * curve(t) - curve(2 * t)) / (12.0 * t);
}

Matrix generator_matrix(const ActionModel& action, const Vector& q) {
  Matrix X(action.space_dim, action.group->dim());
  for (int i = 0; i < action.group->dim(); ++i) X.col(i) = infinitesimal_generator(action, i, q);
  return X;
}

Matrix action_differential(const ActionModel& action, const GroupElement& g, const Vector& q) {
  return jacobian_fd([&](const Vector& p) { return action.act(g, p); }, q);
}

ActionModel se2_planar_action(int n_points) {
  return {se2_group(), 2 * n_points, [n_points](const GroupElement& g, const Vector& q) {
            const Complex A = cplx(g.coords, 0), v = cplx(g.coords, 2);
            Vector out(q.size());
            for (int p = 0; p < n_points; ++p) put(out, 2 * p, A * cplx(q, 2 * p) + v);
            return out;
          }};
}

ActionModel t2_planar_action(int n_points) {
  return {t2_group(), 2 * n_points, [n_points](const GroupElement& g, const Vector& q) {
            Vector out = q;
            for (int p = 0; p < n_points; ++p) out.segment(2 * p, 2) += g.coords;
            return out;
          }};
}

ActionModel u1_planar_action(int n_points) {
  return {u1_group(), 2 * n_points, [n_points](const GroupElement& g, const Vector& q) {
            const Complex A = cplx(g.coords, 0);
            Vector out(q.size());
            for (int p = 0; p < n_points; ++p) put(out, 2 * p, A * cplx(q, 2 * p));
            return out;
          }};
}

ActionModel translation_action(int n, int copies) {
  return {translation_group(n), n * copies, [n, copies](const GroupElement& g, const Vector& q) {
            Vector out = q;
            for (int c = 0; c < copies; ++c) out.segment(c * n, n) += g.coords;
            return out;
          }};
}

ActionModel trivial_action(int space_dim) {
  return {trivial_group(), space_dim, [](const GroupElement&, const Vector& q) { return q; }};
}

ActionModel product_action(const ActionModel& a, const ActionModel& b) {
  if (a.group != b.group && a.group->name() != b.group->name()) {
    throw std::invalid_argument("product_action: factors use different groups");
  }
  const int na = a.space_dim;
  return {a.group, a.space_dim + b.space_dim, [a, b, na](const GroupElement& g, const Vector& x) {
            return join(a.act(g, x.head(na)), b.act(g, x.tail(x.size() - na)));
          }};
}

ActionModel pullback_action(const ActionModel& a, LieGroupPtr K, std::function<GroupElement(const GroupElement&)> phi) {
  return {std::move(K), a.space_dim,
          [a, phi = std::move(phi)](const GroupElement& k, const Vector& q) { return a.act(phi(k), q); }};
}

GroupAxiomReport check_group_axioms(const LieGroup& G, int n_samples, Rng& rng) {
  GroupAxiomReport rep;
  const GroupElement e = G.identity();
  for (int i = 0; i < n_samples; ++i) {
    const GroupElement a = G.random(rng), b = G.random(rng), c = G.random(rng);
    rep.inverse_violation = std::max(rep.inverse_violation, group_distance(G.compose(a, G.inverse(a)), e));
    rep.inverse_violation = std::max(rep.inverse_violation, group_distance(G.compose(G.inverse(a), a), e));
    rep.associativity_violation = std::max(
        rep.associativity_violation,
        group_distance(G.compose(G.compose(a, b), c), G.compose(a, G.compose(b, c))));
  }
  return rep;
}

ActionAxiomReport check_action_axioms(const ActionModel& action, const std::function<Vector(Rng&)>& sampler,
                                      int n_samples, Rng& rng) {
  ActionAxiomReport rep;
  const LieGroup& G = *action.group;
  for (int i = 0; i < n_samples; ++i) {
    const Vector q = sampler(rng);
    const GroupElement g1 = G.random(rng), g2 = G.random(rng);
    rep.identity_violation = std::max(rep.identity_violation, inf_norm(Vector(action.act(G.identity(), q) - q)));
    const Vector lhs = action.act(g1, action.act(g2, q));
    const Vector rhs = action.act(G.compose(g1, g2), q);
    rep.compatibility_violation = std::max(rep.compatibility_violation, inf_norm(Vector(lhs - rhs)));
  }
  return rep;
}

}  // namespace dlps
