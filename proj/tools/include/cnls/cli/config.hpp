#pragma once

// Run configuration: an INI-like key/value file.
//
//   # comment
//   [grid]
//   n = 1024
//   length = 40
//   [coupling]
//   p = 2
//   a = 1 1 1; 1 1 1; 1 1 1
//   [masses]
//   r = 4
//   s = 0
//   t = 0
//
// Physics keys (grid, coupling, masses, and the evolution/stability/subadd
// keys of the subcommand that needs them) have no defaults. Unknown
// sections and keys are errors.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnls/ground_state.hpp"
#include "cnls/stability.hpp"

namespace cnls::cli {

class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& source, std::size_t line, const std::string& key, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

private:
  std::size_t line_;
  std::string key_;
};

struct EvolutionSection {
  double T = 0.0;
  double dt = 0.0;
  std::size_t snapshot_every = 0;
  std::size_t record_every = 1;
  /// profile.csv to evolve; empty means solve for the ground state first.
  std::string profile;
};

struct StabilitySection {
  PerturbationKind kind = PerturbationKind::random_h1;
  double delta = 0.0;
  /// <= 0 selects the default multiple of delta.
  double eps = 0.0;
  std::vector<std::uint64_t> seeds;
  std::size_t sample_every = 100;
};

struct OutputSection {
  std::filesystem::path dir = "out";
  bool json = true;
  bool csv = true;
};

struct RunConfig {
  std::size_t n = 0;
  double length = 0.0;
  CouplingModel::Matrix a{};
  double p = 0.0;
  MassTriple masses;
  SolverConfig solver;
  /// Polish the flow result with refine_fixed_point.
  bool refine = true;
  std::string init_file;
  std::optional<EvolutionSection> evolution;
  std::optional<StabilitySection> stability;
  std::vector<MassSplit> splits;
  OutputSection output;

  Grid grid() const { return Grid(n, length); }
  CouplingModel model() const { return CouplingModel(a, p); }
};

/// Parses and validates; `source` names the input in diagnostics.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace cnls::cli
