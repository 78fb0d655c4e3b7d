#pragma once

// Run configuration: one JSON document whose keys mirror the parameter
// structs. Unknown keys are rejected; dotted `key=value` overrides are
// applied on top of the file before anything runs.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "bcm/chemo.hpp"
#include "bcm/grid.hpp"
#include "bcm/motility.hpp"
#include "bcm/phase.hpp"
#include "bcm/scenario.hpp"

namespace bcm {

enum class Scenario { OneD, ChemoOnly, Migration, VolumeSweep };

std::string to_string(Scenario s);

struct RelaxOptions {
  double mobility = 1.0;
  /// Nurse/oocyte targets and the occupancy reference follow the current
  /// volumes until this time, then stay frozen.
  double track_time = 2.0;
  double tol = 1e-4;
  double t_max = 10.0;
  /// Fraction of the stability bounds used as the phase step.
  double dt_safety = 0.5;
};

/// Default coefficients with the migration-stage mobility; relaxation runs
/// at RelaxOptions::mobility instead.
inline EnergyParams migration_energy() {
  EnergyParams ep = EnergyParams::defaults();
  ep.mobility = 0.025;
  return ep;
}

struct RunConfig {
  Scenario scenario = Scenario::Migration;
  GridSpec grid{};
  SceneConfig scene = SceneConfig::defaults();
  Window1D window{};
  double right_value = 1.0;  ///< held concentration at the right end of 1D runs
  EnergyParams energy = migration_energy();
  RelaxOptions relax{};
  ChemoParams chemo{};
  SteadyOptions steady{.warm_start = true};
  TimParams tim{};
  double dt_outer = 0.05;
  double t_end = 1000.0;
  int snapshot_every = 2000;
  std::vector<double> snapshot_times{115.0, 480.0, 1000.0};
  double cross_section_y = 2.75;
  double contact_fraction = 0.02;
  int speed_window = 5;
  std::string output_dir = "out";
  std::string resume_from;
  int rng_seed = 0;
  std::vector<double> sweep_volumes{0.12, 0.15, 0.18};

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Strict parse: every key must exist in the default document.
RunConfig config_from_json(const nlohmann::json& doc);

/// Applies "a.b.c=value" to doc. The path must already exist; value is read
/// as JSON when it parses, otherwise as a string. Throws ConfigError.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Defaults, merged with the file (if any), then the overrides.
nlohmann::json resolve_config(const std::filesystem::path& file,
                              const std::vector<std::string>& overrides);

RunConfig load_config(const std::filesystem::path& file,
                      const std::vector<std::string>& overrides = {});

}  // namespace bcm
