#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dlps/dlps.hpp"

namespace dlps::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kSolver = 2, kIo = 3 };

/// Parsed run configuration. Missing keys take the defaults below.
struct RunConfig {
  std::string system = "se2-two-body";
  double h = 0.1;
  std::string potential_family = "linear";
  double potential_coefficient = 0.5;
  int n_steps = 50;
  std::optional<Vector> initial;  // (eps0, m1)
  NewtonConfig newton;
  std::uint64_t seed = 42;
  int samples = 20;
  int dim = 1;
  double omega = 1.0;
  Matrix mass;       // dms-custom; empty means identity of size dim
  Matrix stiffness;  // dms-custom; empty means zero
  double lagrangian_perturbation = 0.0;

  void validate() const;
};

/// Throws std::invalid_argument on malformed JSON or bad values.
RunConfig parse_config(const std::string& json_text);
/// Normalized JSON echo of a config (defaults filled in).
std::string config_to_json(const RunConfig& cfg);

bool is_registered(const std::string& system);
DlpsSystem build_system(const RunConfig& cfg);
/// Configured initial pair or the system default.
Vector initial_point(const RunConfig& cfg, const DlpsSystem& sys);

/// Entry point of the `dlps` binary; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace dlps::cli
