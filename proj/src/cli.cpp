#include "dlps/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "dlps/diagnostics.hpp"
#include "dlps/systems.hpp"
#include "dlps/two_body.hpp"

namespace dlps::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::set<std::string> kSystems = {"se2-two-body", "free-particle", "harmonic-oscillator", "dms-custom"};
const std::set<std::string> kConfigKeys = {"system",  "h",    "potential", "n_steps", "initial", "newton",
                                           "seed",    "samples", "dim",    "omega",   "mass",    "stiffness",
                                           "lagrangian_perturbation"};

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> log = [] {
    auto l = spdlog::stderr_color_mt("dlps");
    const char* env = std::getenv("DLPS_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return log;
}

// Report tolerances; --tol replaces all of them.
struct Tolerances {
  double residual = 1e-8;
  double roundtrip = 1e-8;
  double stage = 1e-8;
  double conjugation = 1e-10;
  double identity = 1e-10;
  double ivcm = 1e-9;
  double morphism = 1e-9;
  double momentum = 1e-8;
  double conservation = 1e-10;
  double symplectic = 1e-6;
  double variational = 1e-6;
  double poisson = 1e-6;

  void override_all(double t) {
    for (double* p : {&residual, &roundtrip, &stage, &conjugation, &identity, &ivcm, &morphism, &momentum,
                      &conservation, &symplectic, &variational, &poisson})
      *p = t;
  }
  json to_json() const {
    return json{{"residual", residual},         {"roundtrip", roundtrip},   {"stage", stage},
                {"conjugation", conjugation},   {"identity", identity},     {"ivcm", ivcm},
                {"morphism", morphism},         {"momentum", momentum},     {"conservation", conservation},
                {"symplectic", symplectic},     {"variational", variational}, {"poisson", poisson}};
  }
};

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  bool timing = false;
};

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Vector parse_vector(const json& j, const char* key) {
  if (!j.is_array()) throw std::invalid_argument(std::string("config: '") + key + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument(std::string("config: '") + key + "' must contain numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

// A number becomes a 1x1 matrix, expanded to a multiple of the identity when the system is built.
Matrix parse_matrix(const json& j, const char* key) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string("config: '") + key + "' must be a number or matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = parse_vector(j[static_cast<std::size_t>(i)], key);
    if (i == 0) m.resize(rows, row.size());
    if (row.size() != m.cols()) throw std::invalid_argument(std::string("config: '") + key + "' rows differ in length");
    m.row(i) = row.transpose();
  }
  return m;
}

Matrix expand(const Matrix& m, int dim, double fallback) {
  if (m.size() == 0) return fallback * Matrix::Identity(dim, dim);
  if (m.rows() == 1 && m.cols() == 1) return m(0, 0) * Matrix::Identity(dim, dim);
  if (m.rows() != dim || m.cols() != dim) throw std::invalid_argument("config: matrix size does not match 'dim'");
  return m;
}

double scalar_of(const Matrix& m, double fallback) {
  if (m.size() == 0) return fallback;
  if (m.size() != 1) throw std::invalid_argument("config: this system takes a scalar mass");
  return m(0, 0);
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config: '") + key + "' has the wrong type");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Row k: k, eps_k, m_{k+1}, residual of the triple ending at pair k (0 for k = 0).
void write_path_csv(const fs::path& path, const DlpsSystem& sys, const DiscretePath& p) {
  std::ostringstream os;
  os << "k";
  for (int i = 0; i < sys.e(); ++i) os << ",eps_" << i;
  for (int i = 0; i < sys.m(); ++i) os << ",m_" << i;
  os << ",residual_norm\n";
  const std::vector<double> res = path_residuals(sys, p);
  for (std::size_t k = 0; k < p.size(); ++k) {
    os << k;
    for (Eigen::Index i = 0; i < p[k].size(); ++i) os << ',' << format_double(p[k](i));
    os << ',' << format_double(k == 0 ? 0.0 : res[k - 1]) << '\n';
  }
  write_text(path, os.str());
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double path_distance(const DiscretePath& a, const DiscretePath& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, inf_norm(Vector(a[k] - b[k])));
  return d;
}

json check_entry(double value, double tol) { return json{{"value", value}, {"tol", tol}, {"pass", value <= tol}}; }

bool all_pass(const json& checks) {
  for (const auto& [name, c] : checks.items()) {
    if (c.contains("pass") && !c["pass"].get<bool>()) return false;
  }
  return true;
}

two_body::TwoBodyConfig two_body_config(const RunConfig& cfg) {
  two_body::TwoBodyConfig t;
  t.h = cfg.h;
  t.potential = two_body::make_potential(cfg.potential_family, cfg.potential_coefficient);
  return t;
}

void require_two_body(const RunConfig& cfg, const char* command) {
  if (cfg.system != "se2-two-body") {
    throw std::invalid_argument(std::string(command) + ": no symmetry reduction is registered for system '" +
                                cfg.system + "'");
  }
}

ValidationOptions validation_options(const RunConfig& cfg) {
  ValidationOptions v;
  v.samples = cfg.samples;
  v.seed = cfg.seed;
  return v;
}

// Simulates the configured system; a failed run becomes a solver error after logging.
DiscretePath simulate_or_throw(const RunConfig& cfg, const DlpsSystem& sys) {
  const Vector x = initial_point(cfg, sys);
  SimulationResult res = simulate(sys, sys.eps(x), sys.base(x), cfg.n_steps, cfg.newton);
  if (!res.ok()) logger()->error("simulation failed at step {}", res.failed_step);
  return res.value();
}

struct Context {
  RunConfig cfg;
  Tolerances tol;
  Options opts;
  fs::path out;
};

json header(const char* command, const Context& ctx) {
  json j;
  j["command"] = command;
  j["system"] = ctx.cfg.system;
  j["config"] = json::parse(config_to_json(ctx.cfg));
  j["tolerances"] = ctx.tol.to_json();
  return j;
}

// ---- subcommands: each fills `report` and returns an exit code.

int cmd_simulate(const Context& ctx, json& report) {
  const DlpsSystem sys = build_system(ctx.cfg);
  const Vector x = initial_point(ctx.cfg, sys);
  const SimulationResult res = simulate(sys, sys.eps(x), sys.base(x), ctx.cfg.n_steps, ctx.cfg.newton);
  write_path_csv(ctx.out / "trajectory.csv", sys, res.path);
  report["newton"] = {{"residual_tol", ctx.cfg.newton.residual_tol}, {"max_iters", ctx.cfg.newton.max_iters}};
  report["pairs"] = res.path.size();
  report["max_residual"] = max_of(path_residuals(sys, res.path));
  int iters = 0;
  for (const auto& d : res.diagnostics) iters = std::max(iters, d.iterations);
  report["max_newton_iterations"] = iters;
  report["ok"] = res.ok();
  if (!res.ok()) {
    report["failed_step"] = res.failed_step;
    try {
      std::rethrow_exception(res.error);
    } catch (const std::exception& e) {
      report["error"] = e.what();
    }
    return kSolver;
  }
  return kOk;
}

int cmd_reduce(const Context& ctx, json& report) {
  require_two_body(ctx.cfg, "reduce");
  const auto tb = two_body_config(ctx.cfg);
  const DlpsSystem full = build_system(ctx.cfg);
  const DiscretePath traj = simulate_or_throw(ctx.cfg, full);
  const ReductionResult red = reduce(full, two_body::make_reduced_model(), validation_options(ctx.cfg));
  const DiscretePath proj = project_path(red.model, traj);
  write_path_csv(ctx.out / "reduced_trajectory.csv", red.system, proj);

  const SimulationResult rsim =
      simulate(red.system, proj.eps(0), proj.base(0), static_cast<int>(proj.size()) - 1, ctx.cfg.newton);
  const DiscretePath& rpath = rsim.value();

  double z_drift = 0.0, closed_step = 0.0;
  for (std::size_t k = 0; k < proj.size(); ++k) {
    z_drift = std::max(z_drift, inf_norm(Vector(proj[k].segment(2, 2) - proj[0].segment(2, 2))));
  }
  for (std::size_t k = 1; k < rpath.size(); ++k) {
    const Vector& y = rpath[k - 1];
    const auto cf = two_body::closed_form_reduced_step(tb, y.head(2), y.segment(2, 2), y.tail(2));
    closed_step = std::max({closed_step, inf_norm(Vector(cf.z1 - rpath[k].segment(2, 2))),
                            inf_norm(Vector(cf.r2 - rpath[k].tail(2)))});
  }
  Rng rng(ctx.cfg.seed);
  double l_identity = 0.0, l_closed = 0.0, ivcm_closed = 0.0;
  for (const auto& [x0, x1] : sample_c2(full, ctx.cfg.samples, rng)) {
    const Vector y0 = red.model.upsilon(x0), y1 = red.model.upsilon(x1);
    const double lr = red.system.lagrangian_value(y0);
    l_identity = std::max(l_identity, std::abs(lr - full.lagrangian_value(x0)));
    l_closed = std::max(l_closed, std::abs(lr - two_body::closed_form_reduced_lagrangian(tb, y0)));
    ivcm_closed = std::max(ivcm_closed, inf_norm(Matrix(red.system.ivcm_matrix(y0, y1) - two_body::closed_form_reduced_ivcm())));
  }
  json checks;
  checks["projected_residual_max"] = check_entry(max_of(path_residuals(red.system, proj)), ctx.tol.residual);
  checks["reduced_vs_projected_max"] = check_entry(path_distance(rpath, proj), ctx.tol.residual);
  checks["z_drift_max"] = check_entry(z_drift, ctx.tol.identity);
  checks["closed_form_step_max"] = check_entry(closed_step, ctx.tol.residual);
  checks["lagrangian_identity_max"] = check_entry(l_identity, ctx.tol.identity);
  checks["lagrangian_closed_form_max"] = check_entry(l_closed, ctx.tol.identity);
  checks["ivcm_closed_form_max"] = check_entry(ivcm_closed, ctx.tol.ivcm);
  report["pairs"] = proj.size();
  report["flagged_samples"] = red.flagged_samples();
  report["checks"] = checks;
  return all_pass(checks) ? kOk : kValidation;
}

int cmd_reconstruct(const Context& ctx, json& report) {
  require_two_body(ctx.cfg, "reconstruct");
  const DlpsSystem full = build_system(ctx.cfg);
  const DiscretePath traj = simulate_or_throw(ctx.cfg, full);
  const ReducedModel model = two_body::make_reduced_model();
  reduce(full, model, validation_options(ctx.cfg));
  const DiscretePath proj = project_path(model, traj);
  const DiscretePath rec = reconstruct_path(model, proj, traj.eps(0), traj.base(0));
  write_path_csv(ctx.out / "reconstructed_trajectory.csv", full, rec);

  Rng rng(ctx.cfg.seed);
  const GroupElement g = model.group().random(rng);
  const Vector gx0 = model.group_action.act(g, traj[0]);
  const DiscretePath rec_g = reconstruct_path(model, proj, full.eps(gx0), full.base(gx0));
  DiscretePath moved(full.e(), full.m());
  for (const Vector& x : traj.points()) moved.push_back(model.group_action.act(g, x));
  double fidelity = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k) fidelity = std::max(fidelity, inf_norm(Vector(model.upsilon(rec[k]) - proj[k])));

  json checks;
  checks["roundtrip_max"] = check_entry(path_distance(rec, traj), ctx.tol.roundtrip);
  checks["equivariance_max"] = check_entry(path_distance(rec_g, moved), ctx.tol.roundtrip);
  checks["compatibility_max"] = check_entry(rec.compatibility_violation(full.bundle()), ctx.tol.roundtrip);
  checks["upsilon_fidelity_max"] = check_entry(fidelity, ctx.tol.roundtrip);
  report["pairs"] = rec.size();
  report["roundtrip_max"] = checks["roundtrip_max"]["value"];
  report["checks"] = checks;
  return all_pass(checks) ? kOk : kValidation;
}

int cmd_stages(const Context& ctx, json& report) {
  require_two_body(ctx.cfg, "stages");
  const StagedSetup setup = two_body::make_staged_setup(two_body_config(ctx.cfg), validation_options(ctx.cfg));
  const DiscretePath traj = simulate_or_throw(ctx.cfg, setup.system);
  Rng rng(ctx.cfg.seed);
  const StageReport rep = two_stage(setup, traj, rng, std::max(ctx.cfg.samples, 1), ctx.tol.conjugation);

  const StagedSystems staged = reduce_in_stages(setup, validation_options(ctx.cfg));
  const DiscretePath by_h = project_path(setup.model_H, traj);
  const DiscretePath by_gh = project_path(setup.model_GH, by_h);
  const DiscretePath by_g = project_path(setup.model_G, traj);

  // Residual action of the second stage: generic construction against the closed form.
  const ResidualActions generic = residual_actions(setup.model_H, setup.action_G_on_M, setup.action_G_on_M,
                                                   u1_group(), embed_rotation);
  const ActionModel closed = two_body::residual_action_E();
  double action_gap = 0.0, symmetry = 0.0;
  for (const auto& [y0, y1] : sample_c2(staged.by_H.system, ctx.cfg.samples, rng)) {
    const GroupElement k = u1_group()->random(rng);
    const Vector e0 = staged.by_H.system.eps(y0);
    action_gap = std::max(action_gap, inf_norm(Vector(generic.action_E.act(k, e0) - closed.act(k, e0))));
    const Vector ky = product_action(closed, two_body::residual_action_M()).act(k, y0);
    symmetry = std::max(symmetry, std::abs(staged.by_H.system.lagrangian_value(ky) - staged.by_H.system.lagrangian_value(y0)));
  }
  json checks;
  checks["stage_comparison_max"] = check_entry(rep.max_violation, ctx.tol.stage);
  checks["conjugation_violation"] = check_entry(rep.conjugation_violation, ctx.tol.conjugation);
  checks["stage_h_residual_max"] = check_entry(max_of(path_residuals(staged.by_H.system, by_h)), ctx.tol.residual);
  checks["stage_gh_residual_max"] = check_entry(max_of(path_residuals(staged.by_GH.system, by_gh)), ctx.tol.residual);
  checks["stage_g_residual_max"] = check_entry(max_of(path_residuals(staged.by_G.system, by_g)), ctx.tol.residual);
  checks["residual_action_max"] = check_entry(action_gap, ctx.tol.identity);
  checks["residual_symmetry_max"] = check_entry(symmetry, ctx.tol.identity);
  report["pairs"] = traj.size();
  report["stage_comparison_max"] = rep.max_violation;
  report["per_step"] = rep.per_step;
  report["checks"] = checks;
  return all_pass(checks) ? kOk : kValidation;
}

json morphism_json(const MorphismReport& m, double tol) {
  return json{{"cond1_rank_ok", m.cond1_rank_ok}, {"full_rank_min", m.full_rank_min},
              {"cond2_ok", m.cond2_ok},           {"d1_rank_min", m.d1_rank_min},
              {"cond3", m.cond3},                 {"cond4", m.cond4},
              {"cond5", m.cond5},                 {"cond6", m.cond6},
              {"samples", m.samples},             {"tol", tol},
              {"pass", m.passes(tol)}};
}

json momentum_json(const MomentumReport& m, const Tolerances& tol, bool conserved) {
  json series = json::array();
  for (const Vector& j : m.series) series.push_back(vec_json(j));
  json out{{"evolution_max", m.max_violation},
           {"drift_max", m.max_drift},
           {"precondition_ok", m.precondition_ok},
           {"max_residual", m.max_residual},
           {"series", series}};
  bool pass = m.precondition_ok && m.max_violation <= tol.momentum;
  if (conserved) pass = pass && m.max_drift <= tol.conservation;
  out["pass"] = pass;
  return out;
}

int cmd_check(const Context& ctx, json& report) {
  const RunConfig& cfg = ctx.cfg;
  const DlpsSystem sys = build_system(cfg);
  const DiscretePath traj = simulate_or_throw(cfg, sys);
  const bool two = cfg.system == "se2-two-body";
  const ReducedModel model = two ? two_body::make_reduced_model() : identity_model(sys);
  const ReductionResult red = reduce(sys, model, validation_options(cfg));
  Rng rng(cfg.seed);
  const std::vector<C2Point> samples = sample_c2(sys, cfg.samples, rng);

  json checks;
  // Morphism conditions; the perturbation shifts the target Lagrangian by a constant.
  DlpsSystem target = red.system;
  if (cfg.lagrangian_perturbation != 0.0) {
    const SmoothMap L = red.system.lagrangian();
    const double eps = cfg.lagrangian_perturbation;
    target = red.system.with_lagrangian(SmoothMap(
        L.in_dim(), 1, [L, eps](const Vector& y) { return Vector(L(y).array() + eps); },
        [L](const Vector& y) { return L.jacobian(y); }));
  }
  checks["morphism_upsilon"] = morphism_json(check_morphism(model.upsilon, sys, target, samples), ctx.tol.morphism);
  const GroupElement g = model.group().random(rng);
  checks["morphism_translation"] =
      morphism_json(check_morphism(translation_map(model.group_action, g), sys, sys, samples), ctx.tol.morphism);

  // Momentum: SE(2) for the two-body system, translations for the free particle.
  if (two) {
    checks["momentum"] = momentum_json(momentum_evolution_check(sys, se2_planar_action(2), traj), ctx.tol, true);
    const DiscretePath proj = project_path(red.model, traj);
    checks["momentum_reduced"] =
        momentum_json(momentum_evolution_check(red.system, two_body::residual_action_E(), proj), ctx.tol, false);
  } else if (cfg.system == "free-particle") {
    checks["momentum"] = momentum_json(momentum_evolution_check(sys, translation_action(cfg.dim), traj), ctx.tol, true);
  }

  const SymplecticReport sym = symplectic_check(sys, traj);
  checks["symplectic"] = json{{"value", sym.max_violation}, {"tol", ctx.tol.symplectic},
                              {"min_rcond", sym.min_rcond}, {"pass", sym.max_violation <= ctx.tol.symplectic}};

  double dS = 0.0;
  if (traj.size() >= 2) {
    for (int v = 0; v < cfg.samples; ++v) {
      std::vector<Vector> tilde;
      for (std::size_t k = 1; k < traj.size(); ++k) tilde.push_back(random_normal(rng, sys.e()));
      dS = std::max(dS, std::abs(action_derivative(sys, traj, build_fixed_endpoint_variation(sys, traj, tilde))));
    }
  }
  checks["variational"] = check_entry(dS, ctx.tol.variational);

  std::vector<Vector> points;
  for (const auto& s : samples) points.push_back(s.first);
  const PoissonReport pr =
      poisson_descent_check(model, sys, coordinate_functions(model.target_c1_dim()), points, rng, 5);
  checks["poisson"] = json{{"value", pr.max_variation}, {"tol", ctx.tol.poisson}, {"max_bracket", pr.max_bracket},
                           {"samples", pr.samples}, {"pass", pr.max_variation <= ctx.tol.poisson}};

  report["pairs"] = traj.size();
  report["lagrangian_perturbation"] = cfg.lagrangian_perturbation;
  report["checks"] = checks;
  return all_pass(checks) ? kOk : kValidation;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int execute(const char* command, const std::function<int(const Context&, json&)>& body, const char* report_name,
            const Options& opts) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx;
  ctx.opts = opts;
  try {
    ctx.cfg = parse_config(opts.config_path.empty() ? std::string("{}") : read_file(opts.config_path));
    if (opts.seed) ctx.cfg.seed = *opts.seed;
    if (opts.tol) {
      if (!(*opts.tol > 0.0)) throw std::invalid_argument("--tol must be positive");
      ctx.tol.override_all(*opts.tol);
    }
    ctx.out = opts.out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec || !fs::is_directory(ctx.out)) throw IoError("cannot create output directory " + ctx.out.string());
  } catch (const IoError& e) {
    logger()->error("{}", e.what());
    return kIo;
  } catch (const std::exception& e) {
    logger()->error("{}", e.what());
    return kValidation;
  }

  json report = header(command, ctx);
  int code = kOk;
  auto fail = [&](int c, const std::exception& e) {
    logger()->error("{}: {}", command, e.what());
    report["error"] = e.what();
    code = c;
  };
  try {
    code = body(ctx, report);
  } catch (const IoError& e) {
    logger()->error("{}", e.what());
    return kIo;
  } catch (const ValidationError& e) {
    fail(kValidation, e);
    report["failed_identity"] = e.identity();
  } catch (const MatchingError& e) {
    fail(kValidation, e);
  } catch (const std::invalid_argument& e) {
    fail(kValidation, e);
  } catch (const Error& e) {
    fail(kSolver, e);  // NonConvergence, SingularJacobian, DomainError, RegularityError
  } catch (const std::exception& e) {
    fail(kSolver, e);
  }
  report["exit_code"] = code;
  if (opts.timing) report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_json(ctx.out / report_name, report);
  } catch (const IoError& e) {
    logger()->error("{}", e.what());
    return kIo;
  }
  logger()->info("{} finished with exit code {}", command, code);
  return code;
}

}  // namespace

void RunConfig::validate() const {
  if (!is_registered(system)) throw std::invalid_argument("config: unknown system '" + system + "'");
  if (h == 0.0 || !std::isfinite(h)) throw std::invalid_argument("config: 'h' must be finite and nonzero");
  if (n_steps < 0) throw std::invalid_argument("config: 'n_steps' must be >= 0");
  if (samples < 1) throw std::invalid_argument("config: 'samples' must be >= 1");
  if (dim < 1) throw std::invalid_argument("config: 'dim' must be >= 1");
  if (!std::isfinite(omega) || !std::isfinite(lagrangian_perturbation)) {
    throw std::invalid_argument("config: non-finite parameter");
  }
  two_body::make_potential(potential_family, potential_coefficient);
  newton.validate();
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  RunConfig c;
  if (j.contains("system")) c.system = get_as<std::string>(j["system"], "system");
  if (j.contains("h")) c.h = get_as<double>(j["h"], "h");
  if (j.contains("potential")) {
    const json& p = j["potential"];
    if (!p.is_object()) throw std::invalid_argument("config: 'potential' must be an object");
    for (const auto& [key, value] : p.items()) {
      if (key != "family" && key != "coefficient") throw std::invalid_argument("config: unknown potential key '" + key + "'");
    }
    if (p.contains("family")) c.potential_family = get_as<std::string>(p["family"], "potential.family");
    if (p.contains("coefficient")) c.potential_coefficient = get_as<double>(p["coefficient"], "potential.coefficient");
  }
  if (j.contains("n_steps")) c.n_steps = get_as<int>(j["n_steps"], "n_steps");
  if (j.contains("initial") && !j["initial"].is_null()) c.initial = parse_vector(j["initial"], "initial");
  if (j.contains("newton")) {
    const json& n = j["newton"];
    if (!n.is_object()) throw std::invalid_argument("config: 'newton' must be an object");
    for (const auto& [key, value] : n.items()) {
      if (key == "residual_tol") c.newton.residual_tol = get_as<double>(value, "newton.residual_tol");
      else if (key == "max_iters") c.newton.max_iters = get_as<int>(value, "newton.max_iters");
      else if (key == "backtracking") c.newton.backtracking = get_as<bool>(value, "newton.backtracking");
      else if (key == "max_halvings") c.newton.max_halvings = get_as<int>(value, "newton.max_halvings");
      else throw std::invalid_argument("config: unknown newton key '" + key + "'");
    }
  }
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("samples")) c.samples = get_as<int>(j["samples"], "samples");
  if (j.contains("dim")) c.dim = get_as<int>(j["dim"], "dim");
  if (j.contains("omega")) c.omega = get_as<double>(j["omega"], "omega");
  if (j.contains("mass") && !j["mass"].is_null()) c.mass = parse_matrix(j["mass"], "mass");
  if (j.contains("stiffness") && !j["stiffness"].is_null()) c.stiffness = parse_matrix(j["stiffness"], "stiffness");
  if (j.contains("lagrangian_perturbation")) {
    c.lagrangian_perturbation = get_as<double>(j["lagrangian_perturbation"], "lagrangian_perturbation");
  }
  c.validate();
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["system"] = c.system;
  j["h"] = c.h;
  j["potential"] = {{"family", c.potential_family}, {"coefficient", c.potential_coefficient}};
  j["n_steps"] = c.n_steps;
  j["initial"] = c.initial ? vec_json(*c.initial) : json(nullptr);
  j["newton"] = {{"residual_tol", c.newton.residual_tol},
                 {"max_iters", c.newton.max_iters},
                 {"backtracking", c.newton.backtracking},
                 {"max_halvings", c.newton.max_halvings}};
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["dim"] = c.dim;
  j["omega"] = c.omega;
  j["mass"] = c.mass.size() ? mat_json(c.mass) : json(nullptr);
  j["stiffness"] = c.stiffness.size() ? mat_json(c.stiffness) : json(nullptr);
  j["lagrangian_perturbation"] = c.lagrangian_perturbation;
  return j.dump();
}

bool is_registered(const std::string& system) { return kSystems.count(system) > 0; }

DlpsSystem build_system(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.system == "se2-two-body") return two_body::make_full_system(two_body_config(cfg));
  if (cfg.system == "free-particle") return free_particle(cfg.dim, cfg.h, scalar_of(cfg.mass, 1.0));
  if (cfg.system == "harmonic-oscillator") return harmonic_oscillator(cfg.h, cfg.omega, cfg.dim);
  return quadratic_dms(expand(cfg.mass, cfg.dim, 1.0), expand(cfg.stiffness, cfg.dim, 0.0), cfg.h);
}

Vector initial_point(const RunConfig& cfg, const DlpsSystem& sys) {
  if (cfg.initial) {
    if (cfg.initial->size() != sys.c1_dim()) {
      throw std::invalid_argument("config: 'initial' needs " + std::to_string(sys.c1_dim()) + " values");
    }
    return *cfg.initial;
  }
  if (cfg.system == "se2-two-body") return two_body::default_initial();
  const int n = sys.e();
  if (cfg.system == "free-particle") return join(Vector::Zero(n), Vector::Constant(n, 0.1));
  if (cfg.system == "harmonic-oscillator") return join(Vector::Ones(n), Vector::Constant(n, std::cos(cfg.omega * cfg.h)));
  return join(Vector::Ones(n), Vector::Ones(n));
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Discrete Lagrange-Poincare systems: simulation, reduction and structure checks"};
  app.require_subcommand(1);
  Options opts;
  struct Command {
    const char* name;
    const char* help;
    const char* report;
    std::function<int(const Context&, json&)> body;
  };
  const std::vector<Command> commands = {
      {"simulate", "Integrate the configured system; writes trajectory.csv and trajectory.json", "trajectory.json", cmd_simulate},
      {"reduce", "Reduce by the registered symmetry and compare reduced dynamics", "reduce.json", cmd_reduce},
      {"reconstruct", "Reconstruct a trajectory from its projection", "reconstruct.json", cmd_reconstruct},
      {"stages", "Compare reduction in two stages with one-shot reduction", "stages.json", cmd_stages},
      {"check", "Morphism, momentum, symplectic, variational and Poisson checks", "check.json", cmd_check},
  };
  std::vector<CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opts.config_path, "JSON run configuration");
    sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", opts.seed, "Seed for sampled checks (overrides the config)");
    sub->add_option("--tol", opts.tol, "Override every report tolerance");
    sub->add_flag("--timing", opts.timing, "Record wall time in the JSON sidecar");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (subs[i]->parsed()) return execute(commands[i].name, commands[i].body, commands[i].report, opts);
  }
  return kValidation;
}

}  // namespace dlps::cli
