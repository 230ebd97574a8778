#pragma once

// File formats shared by the subcommands. CSV for fields and time series,
// JSON for scalar results. Numbers are written with 17 significant digits so
// that files round-trip and are byte-identical across runs.

#include <filesystem>
#include <string>
#include <vector>

#include "cnls/evolution.hpp"
#include "cnls/ground_state.hpp"
#include "cnls/stability.hpp"
#include "json.hpp"

namespace cnls::cli {

/// I/O or format problem with an input file.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string format_number(double v);

/// Columns x, re_u1, im_u1, re_u2, im_u2, re_u3, im_u3; one row per node.
void write_profile_csv(const std::filesystem::path& path, const State& s);

/// Reads a profile written by write_profile_csv; the node column must match
/// `grid` (GridMismatch otherwise).
State read_profile_csv(const std::filesystem::path& path, const Grid& grid);

/// Columns t, energy_drift, mass_drift_u1, mass_drift_u2, mass_drift_u3 and,
/// when present, orbital_distance.
void write_trace_csv(const std::filesystem::path& path, const EvolutionTrace& trace);

/// Columns t, x, re_u1, ..., im_u3 for every snapshot in time order.
void write_snapshots_csv(const std::filesystem::path& path, const EvolutionTrace& trace);

nlohmann::ordered_json groundstate_json(const GroundState& g, const CouplingModel& model);
nlohmann::ordered_json stability_json(const StabilityReport& r);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cnls::cli
