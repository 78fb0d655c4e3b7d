#pragma once

// Post-processing: cluster centroid and speed, cross-sections, confinement
// and mass-balance metrics, and the corridor-gradient check.

#include <utility>
#include <vector>

#include "bcm/chemo.hpp"
#include "bcm/grid.hpp"
#include "bcm/phase.hpp"

namespace bcm {

struct TrajectoryRow {
  double time = 0.0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  double speed = 0.0;
  double cluster_volume = 0.0;
  double mass_balance_residual = 0.0;
};

using Trajectory = std::vector<TrajectoryRow>;

/// h-weighted centre of mass. Throws ContractError for an empty phase.
std::pair<double, double> centroid(const ScalarField& phi);

/// Central-difference speed of the centroid (one-sided at the ends),
/// smoothed by a centred moving average over `window` samples (truncated
/// at the ends). Other columns are copied.
Trajectory speed_series(const Trajectory& raw, int window = 5);

struct Section {
  std::vector<double> x;
  std::vector<double> value;
};

/// f along the horizontal line at y, linearly interpolated between node
/// rows. Throws std::out_of_range when y lies outside the grid.
Section cross_section(const ScalarField& f, double y);

inline constexpr double kInteriorThreshold = 0.9;
inline constexpr double kExteriorThreshold = 0.1;

/// Mean c over cell interiors (max_i phi_i > 0.9) divided by the largest c
/// in the extracellular space (every phi_i < 0.1, the epithelium included).
/// Throws ContractError when either region is empty or the exterior
/// maximum is not positive.
double confinement_metric(const ScalarField& c, const PhaseSet& ps);

/// |k int c - int source| / int source. Throws ContractError for a zero source.
double mass_balance_residual(const ChemoState& st, const ChemoParams& cp);

struct CorridorProfile {
  std::vector<double> distance;  ///< from the oocyte boundary, increasing
  std::vector<double> value;
  /// Largest rise between consecutive samples relative to the profile max.
  double max_ripple = 0.0;
};

/// Samples c at extracellular nodes of the grid row nearest to y, walking
/// anterior (decreasing x) from the oocyte boundary (phi_oct = 0.5).
CorridorProfile corridor_profile(const ScalarField& c, const PhaseSet& ps, double y);

}  // namespace bcm
