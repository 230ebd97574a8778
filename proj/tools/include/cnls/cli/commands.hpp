#pragma once

// Subcommands of the `cnls` executable. Each returns a process exit code and
// writes its results under the output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cnls/cli/config.hpp"

namespace cnls::cli {

enum ExitCode : int {
  kExitPass = 0,
  kExitConfig = 1,
  kExitNonConvergence = 2,
  kExitBlowUp = 3,
  kExitValidation = 4,
};

struct Options {
  /// Overrides output.dir when non-empty.
  std::filesystem::path out;
  /// Overrides solver.seed and replaces the stability seed list.
  std::optional<std::uint64_t> seed;
  /// Overrides evolution.profile when non-empty.
  std::string profile;
  bool quiet = false;
  /// Recorded in metadata.json.
  std::string config_path;
};

int cmd_solve(RunConfig cfg, const Options& opts, std::ostream& log);
int cmd_evolve(RunConfig cfg, const Options& opts, std::ostream& log);
int cmd_stability(RunConfig cfg, const Options& opts, std::ostream& log);
int cmd_subadd(RunConfig cfg, const Options& opts, std::ostream& log);

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

/// Built-in oracle suite: sech derivative and quadrature, closed-form
/// residuals, lambda(r,0,0) = -r^3/48 for r in {1,2,4}, and the energy
/// gradient against central differences.
std::vector<Check> validation_checks();
int cmd_validate(const Options& opts, std::ostream& log);

/// Full command line entry point; maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cnls::cli
