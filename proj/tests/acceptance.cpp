// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <dlps cli binary> <scratch dir>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dlps/diagnostics.hpp"
#include "dlps/systems.hpp"
#include "dlps/two_body.hpp"
#include "json.hpp"

using namespace dlps;
namespace tb = dlps::two_body;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kStepTol = 1e-10;
constexpr double kTrajectoryTol = 1e-8;
constexpr double kReconstructTol = 1e-8;
constexpr double kStageTol = 1e-8;
constexpr double kConnectionTol = 1e-10;
constexpr double kConservationTol = 1e-10;
constexpr double kEvolutionTol = 1e-8;
constexpr double kSymplecticTol = 1e-6;
constexpr double kVariationalTol = 1e-6;
constexpr double kMorphismTol = 1e-9;
constexpr double kNegativeControlMin = 1e-2;

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double path_distance(const DiscretePath& a, const DiscretePath& b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, inf_norm(Vector(a[k] - b[k])));
  return d;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

tb::TwoBodyConfig config(const std::string& family = "linear", double c = 0.5) {
  tb::TwoBodyConfig cfg;
  cfg.potential = tb::make_potential(family, c);
  return cfg;
}

DiscretePath full_trajectory(const DlpsSystem& full, int n) {
  return simulate(full, tb::default_initial().head(4), tb::default_initial().tail(4), n).value();
}

// Full-space pair with separations r0, r1 (scaled) and centers s0 = 0, s1 = 2 z0.
Vector lift_pair(const Vector& r0, const Vector& z0, const Vector& r1) {
  const double s2 = std::sqrt(2.0);
  Vector x(8);
  x.segment(0, 2) = s2 * r0 / 2.0;
  x.segment(2, 2) = -s2 * r0 / 2.0;
  x.segment(4, 2) = (2.0 * z0 + s2 * r1) / 2.0;
  x.segment(6, 2) = (2.0 * z0 - s2 * r1) / 2.0;
  return x;
}

Outcome ac1() {
  const tb::TwoBodyConfig cfg = config();
  const DlpsSystem full = tb::make_full_system(cfg);
  const ReductionResult red = reduce(full, tb::make_reduced_model());
  const StepResult ref = step(red.system, vec({1, 0, 0, 0}), vec({1, 0}));
  double ref_gap = std::max(inf_norm(Vector(ref.eps1.tail(2))), inf_norm(Vector(ref.m2 - vec({0.99, 0}))));

  Rng rng(kSeed);
  double closed_gap = 0.0, full_gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector r0 = tb::u1_quotient().sample(rng), z0 = random_normal(rng, 2, 0.3);
    const Vector r1 = r0 + random_normal(rng, 2, 0.1);
    const StepResult s = step(red.system, join(r0, z0), r1);
    const tb::ReducedStep cf = tb::closed_form_reduced_step(cfg, r0, z0, r1);
    closed_gap = std::max({closed_gap, inf_norm(Vector(s.m2 - cf.r2)), inf_norm(Vector(s.eps1.tail(2) - cf.z1))});
    // Independent oracle: step the full system and project by hand.
    const Vector x = lift_pair(r0, z0, r1);
    const Vector q2 = step(full, x.head(4), x.tail(4)).m2;
    const Vector r2 = (q2.head(2) - q2.tail(2)) / std::sqrt(2.0);
    const Vector z1 = ((q2.head(2) + q2.tail(2)) - (x.segment(4, 2) + x.segment(6, 2))) / 2.0;
    full_gap = std::max({full_gap, inf_norm(Vector(r2 - cf.r2)), inf_norm(Vector(z1 - cf.z1))});
  }
  const double worst = std::max({ref_gap, closed_gap, full_gap});
  return {worst <= kStepTol, "reference " + fmt(ref_gap) + ", closed form " + fmt(closed_gap) + ", full-space " +
                                 fmt(full_gap) + " (tol " + fmt(kStepTol) + ")"};
}

Outcome ac2() {
  const DlpsSystem full = tb::make_full_system(config());
  const ReductionResult red = reduce(full, tb::make_reduced_model());
  const DiscretePath proj = project_path(red.model, full_trajectory(full, 50));
  const double residual = max_of(path_residuals(red.system, proj));
  const DiscretePath sim = simulate(red.system, proj.eps(0), proj.base(0), 50).value();
  const double gap = path_distance(sim, proj);
  return {residual <= kTrajectoryTol && gap <= kTrajectoryTol,
          "projected residual " + fmt(residual) + ", reduced vs projected " + fmt(gap) + " (tol " +
              fmt(kTrajectoryTol) + ")"};
}

Outcome ac3() {
  double worst = 0.0;
  for (const char* fam : {"linear", "quadratic", "zero"}) {
    const DlpsSystem full = tb::make_full_system(config(fam));
    const ReducedModel model = tb::make_reduced_model();
    const DiscretePath traj = full_trajectory(full, 50);
    const DiscretePath back = reconstruct_path(model, project_path(model, traj), traj.eps(0), traj.base(0));
    worst = std::max(worst, path_distance(back, traj));
  }
  return {worst <= kReconstructTol, "roundtrip " + fmt(worst) + " over three potentials (tol " + fmt(kReconstructTol) + ")"};
}

Outcome ac4() {
  const tb::TwoBodyConfig cfg = config();
  const StagedSetup setup = tb::make_staged_setup(cfg);
  Rng rng(kSeed);
  const StageReport rep = two_stage(setup, full_trajectory(setup.system, 50), rng);
  return {rep.max_violation <= kStageTol,
          "stage comparison " + fmt(rep.max_violation) + ", conjugation " + fmt(rep.conjugation_violation) + " (tol " +
              fmt(kStageTol) + ")"};
}

Outcome ac5() {
  Rng rng(kSeed);
  const DiscreteConnection closed = tb::make_t2_connection();
  const DiscreteConnection flat = tb::make_t2_connection_flat();
  const auto pairs = sample_pairs(closed.quotient(), 200, rng);
  const double a = check_equivariance(closed, pairs, rng).max_violation;
  const double b = check_equivariance(flat, pairs, rng).max_violation;
  const double d = connection_distance(closed, flat, pairs);
  return {std::max({a, b, d}) <= kConnectionTol, "closed " + fmt(a) + ", flat " + fmt(b) + ", distance " + fmt(d) +
                                                     " (tol " + fmt(kConnectionTol) + ")"};
}

Outcome ac6() {
  const DlpsSystem full = tb::make_full_system(config());
  const DiscretePath traj = full_trajectory(full, 50);
  const MomentumReport dms = momentum_evolution_check(full, se2_planar_action(2), traj);
  const DlpsSystem fp = free_particle(2, 0.1);
  const MomentumReport fpr =
      momentum_evolution_check(fp, translation_action(2), simulate(fp, vec({0, 0}), vec({0.1, 0.2}), 50).value());
  const ReductionResult red = reduce(full, tb::make_reduced_model());
  const MomentumReport rr = momentum_evolution_check(red.system, tb::residual_action_E(), project_path(red.model, traj));
  const double drift = std::max(dms.max_drift, fpr.max_drift);
  const bool pre = dms.precondition_ok && fpr.precondition_ok && rr.precondition_ok;
  return {pre && drift <= kConservationTol && rr.max_violation <= kEvolutionTol,
          "DMS drift " + fmt(drift) + " (tol " + fmt(kConservationTol) + "), reduced evolution " +
              fmt(rr.max_violation) + " (tol " + fmt(kEvolutionTol) + ")"};
}

Outcome ac7() {
  const DlpsSystem ho = harmonic_oscillator(0.1, 1.0, 1);
  const double a = symplectic_check(ho, simulate(ho, vec({1}), vec({std::cos(0.1)}), 20).value()).max_violation;
  const DlpsSystem full = tb::make_full_system(config());
  const double b = symplectic_check(full, full_trajectory(full, 20)).max_violation;
  return {std::max(a, b) <= kSymplecticTol,
          "harmonic " + fmt(a) + ", two-body " + fmt(b) + " (tol " + fmt(kSymplecticTol) + ")"};
}

Outcome ac8() {
  Rng rng(kSeed);
  const DlpsSystem full = tb::make_full_system(config());
  const DiscretePath traj = full_trajectory(full, 20);
  const ReductionResult by_t2 = reduce(full, tb::make_reduced_model());
  const ReductionResult by_se2 = reduce(full, tb::make_se2_model(full));
  const StagedSetup setup = tb::make_staged_setup(config());
  const StagedSystems staged = reduce_in_stages(setup);
  const DlpsSystem fp = free_particle(2, 0.1), ho = harmonic_oscillator(0.1, 1.0, 2);
  const DlpsSystem custom = quadratic_dms((Matrix(2, 2) << 2, 0.3, 0.3, 1).finished(),
                                          (Matrix(2, 2) << 1, 0.2, 0.2, 3).finished(), 0.05);
  struct Case {
    std::string name;
    DlpsSystem sys;
    DiscretePath path;
  };
  const std::vector<Case> cases = {
      {"free-particle", fp, simulate(fp, vec({0, 0}), vec({0.1, 0.2}), 20).value()},
      {"harmonic-oscillator", ho, simulate(ho, vec({1, 0}), vec({0.99, 0.1}), 20).value()},
      {"dms-custom", custom, simulate(custom, vec({1, 1}), vec({1, 1.02}), 20).value()},
      {"se2-two-body", full, traj},
      {"T2-reduced", by_t2.system, project_path(by_t2.model, traj)},
      {"SE2-reduced", by_se2.system, project_path(by_se2.model, traj)},
      {"U1-of-T2-reduced", staged.by_GH.system, project_path(staged.by_GH.model, project_path(staged.by_H.model, traj))},
  };
  double worst = 0.0;
  std::string worst_name;
  for (const Case& c : cases) {
    for (int v = 0; v < 20; ++v) {
      std::vector<Vector> tilde;
      for (std::size_t k = 1; k < c.path.size(); ++k) tilde.push_back(random_normal(rng, c.sys.e()));
      const double d = std::abs(action_derivative(c.sys, c.path, build_fixed_endpoint_variation(c.sys, c.path, tilde)));
      if (d > worst) {
        worst = d;
        worst_name = c.name;
      }
    }
  }
  return {worst <= kVariationalTol, "max |dS| " + fmt(worst) + " on " + worst_name + " over " +
                                        std::to_string(cases.size()) + " systems (tol " + fmt(kVariationalTol) + ")"};
}

Outcome ac9() {
  Rng rng(kSeed);
  const DlpsSystem full = tb::make_full_system(config());
  const ReducedModel model = tb::make_reduced_model();
  const ReductionResult red = reduce(full, model);
  const ReducedModel model_g = tb::make_se2_model(full);
  const ReductionResult red_g = reduce(full, model_g);
  const std::vector<C2Point> samples = sample_c2(full, 30, rng);

  const MorphismReport up = check_morphism(model.upsilon, full, red.system, samples);
  const MorphismReport up_g = check_morphism(model_g.upsilon, full, red_g.system, samples);
  const GroupElement g = se2_group()->random(rng);
  const MorphismReport lg = check_morphism(translation_map(model_g.group_action, g), full, full, samples);
  const bool positives = up.passes(kMorphismTol) && up_g.passes(kMorphismTol) && lg.passes(kMorphismTol);
  const double worst = std::max({up.cond3, up.cond4, up.cond5, up.cond6, up_g.cond3, up_g.cond4, up_g.cond5,
                                 up_g.cond6, lg.cond3, lg.cond4, lg.cond5, lg.cond6});

  // Negative control: shift the center-of-mass output of the reduction map.
  const SmoothMap base = model.upsilon;
  const SmoothMap shifted(base.in_dim(), base.out_dim(), [base](const Vector& x) {
    Vector y = base(x);
    y(2) += 0.1;
    return y;
  });
  const MorphismReport neg = check_morphism(shifted, full, red.system, samples);
  const bool negative = neg.cond5 >= kNegativeControlMin && !neg.passes(kMorphismTol);
  return {positives && negative, "valid maps max condition " + fmt(worst) + " (tol " + fmt(kMorphismTol) +
                                     "), perturbed cond5 " + fmt(neg.cond5) + " (min " + fmt(kNegativeControlMin) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome ac10(const std::string& cli, const fs::path& scratch) {
  const std::string cfg =
      R"({"system": "se2-two-body", "n_steps": 30, "samples": 10, "seed": 11, "potential": {"family": "quadratic", "coefficient": 0.3}})";
  const std::vector<std::string> commands = {"simulate", "reduce", "reconstruct", "stages", "check"};
  int files = 0;
  std::string problem;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = scratch / ("run" + std::to_string(run));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << cfg;
    for (const std::string& c : commands) {
      const fs::path out = dir / c;
      const std::string cmd = "\"" + cli + "\" " + c + " --config \"" + (dir / "config.json").string() + "\" --out \"" +
                              out.string() + "\" 2>/dev/null";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) problem = c + " exited with " + std::to_string(WEXITSTATUS(status));
    }
  }
  for (const std::string& c : commands) {
    for (const auto& entry : fs::directory_iterator(scratch / "run0" / c)) {
      const fs::path twin = scratch / "run1" / c / entry.path().filename();
      ++files;
      if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) problem = "differs: " + c + "/" + entry.path().filename().string();
    }
  }
  if (!problem.empty()) return {false, problem};
  return {files > 0, std::to_string(files) + " output files byte-identical across two runs"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <dlps cli> <scratch dir>\n");
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argv[2];

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"closed-form reduced step", ac1},
      {"projection is a reduced trajectory", ac2},
      {"reconstruction round trip", ac3},
      {"reduction in two stages", ac4},
      {"connection equivariance", ac5},
      {"momentum conservation and evolution", ac6},
      {"symplectic flow", ac7},
      {"fixed-endpoint variational principle", ac8},
      {"morphism conditions and negative control", ac9},
      {"deterministic CLI output", [&] { return ac10(cli, scratch); }},
  };
  const auto start = std::chrono::steady_clock::now();
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("AC%zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d/%zu criteria passed in %.1f s\n", static_cast<int>(criteria.size()) - failed, criteria.size(), secs);
  return failed == 0 ? 0 : 1;
}
