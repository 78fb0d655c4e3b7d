#pragma once

// Experiment pipelines: the 1D moving window, chamber chemo to steady
// state, the coupled migration run and the cluster-volume sweep. Every
// pipeline is a pure function of its RunConfig and writes a manifest plus
// snapshots under cfg.output_dir.

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bcm/analysis.hpp"
#include "bcm/chemo.hpp"
#include "bcm/config.hpp"
#include "bcm/phase.hpp"

namespace bcm {

struct RunContext {
  /// Dotted overrides, echoed into the manifest.
  std::vector<std::string> overrides;
  /// Progress messages; null means silent.
  std::function<void(const std::string&)> log;
};

struct RelaxReport {
  double time = 0.0;
  long steps = 0;
  double final_rate = 0.0;
  bool converged = false;
};

/// Geometry relaxation without forces at ro.mobility: targets of nurse and
/// oocyte phases and the occupancy reference follow the current volumes
/// until ro.track_time and are frozen afterwards. Stops when the max rate
/// drops below ro.tol or at ro.t_max.
RelaxReport relax_chamber(PhaseSet& ps, const EnergyParams& ep, const RelaxOptions& ro);

/// Builds and relaxes the chamber of cfg (used by every 2D pipeline).
PhaseSet prepared_chamber(const RunConfig& cfg, RelaxReport* report = nullptr);

/// Half the largest extracellular c on the migration path (grid row through
/// the chamber centre, anterior of the oocyte).
double calibrate_rho_K(const ScalarField& c, const PhaseSet& ps, double y_path);

struct SnapshotState {
  long step = 0;
  double time = 0.0;
  std::string stage;
  PhaseSet phases;
  std::optional<ChemoState> chemo;
  double rho_K = 0.0;
  bool tim_active = false;
  std::optional<std::pair<double, double>> previous_centroid;
};

/// Writes fields and snapshot.json (restart state plus diagnostics) to dir.
void write_snapshot(const std::filesystem::path& dir, const SnapshotState& s, const ChemoParams& cp,
                    const TimParams& tp, double dt_outer);

/// Inverse of write_snapshot (fields are read back bit-exactly).
SnapshotState read_snapshot(const std::filesystem::path& dir, const ChemoParams& cp);

nlohmann::json run_one_d(const RunConfig& cfg, const RunContext& ctx = {});
nlohmann::json run_chemo_only(const RunConfig& cfg, const RunContext& ctx = {});
nlohmann::json run_migration(const RunConfig& cfg, const RunContext& ctx = {});
nlohmann::json run_volume_sweep(const RunConfig& cfg, const RunContext& ctx = {});

/// Dispatches on cfg.scenario.
nlohmann::json run(const RunConfig& cfg, const RunContext& ctx = {});

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& tr);
Trajectory read_trajectory_csv(const std::filesystem::path& file);

}  // namespace bcm
