#pragma once

// Chemoattractant transport: dc/dt = div(D(phi) grad c) - k c + sigma |grad phi_oct|
// with a phase-gated diffusivity, explicit sub-stepped integration and
// steady-state detection.

#include <optional>

#include "bcm/grid.hpp"
#include "bcm/phase.hpp"

namespace bcm {

struct ChemoParams {
  double D0 = 1.0;
  double k = 0.002;
  double sigma = 0.2;
  double phi_star = 0.5;
  double s = 0.05;
  double c0 = 0.0;
  /// Fraction of the explicit bound dx^2/(4 max D) used per sub-step.
  double substep_safety = 0.8;
  /// Include phi_0 in the diffusivity suppression sum.
  bool include_epithelium = true;
  FaceAverage face_average = FaceAverage::Harmonic;

  void validate() const;  // throws ConfigError
};

struct ChemoState {
  ScalarField c;
  ScalarField D;       ///< effective diffusivity, frozen within an outer step
  ScalarField source;  ///< sigma |grad phi_oct|
  double time = 0.0;
  /// Held value at the right end node (x = x_max); 1D window runs only.
  std::optional<double> fixed_right;

  void validate() const;
};

/// D0 / (1 + exp((phi - phi_*)/s)).
ScalarField diffusivity_single(const ScalarField& phi, const ChemoParams& cp);

/// D0 h(1 / (1 + sum_i exp((phi_i - phi_*)/s))) over all cells (and phi_0
/// when cp.include_epithelium).
ScalarField diffusivity_multi(const PhaseSet& ps, const ChemoParams& cp);

/// sigma |grad phi_oct|.
ScalarField secretion_field(const ScalarField& phi_oct, double sigma);

/// Chemo state for the chamber: D and the oocyte source from the phases,
/// c = c0 everywhere. Throws StructuralError if no oocyte phase exists.
ChemoState make_chamber_chemo(const PhaseSet& ps, const ChemoParams& cp, double time = 0.0);

/// Refresh D and the source from the current phases, keeping c.
void update_from_phases(ChemoState& st, const PhaseSet& ps, const ChemoParams& cp);

/// div(D grad c) - k c + source (zero at a held node).
ScalarField chemo_rhs(const ChemoState& st, const ChemoParams& cp);

/// ceil(dt_outer / (safety dx^2 / (4 max D))), at least 1.
int substep_count(const ChemoState& st, const ChemoParams& cp, double dt_outer);

/// Advance c by dt_outer with substep_count forward-Euler sub-steps.
ChemoState step_chemo(const ChemoState& st, const ChemoParams& cp, double dt_outer);

/// Exact fixed point of the discrete update with the current D and source
/// (sparse symmetric solve). Requires k > 0 or a held node.
ScalarField steady_solve(const ChemoState& st, const ChemoParams& cp);

struct SteadyResult {
  ChemoState state;
  int steps = 0;
  double residual = 0.0;  ///< max |dc| / dt_outer of the last step
};

struct SteadyOptions {
  double dt_outer = 0.05;
  double tol = 1e-6;
  int max_steps = 200000;
  /// Start the iteration from steady_solve() instead of the given c.
  bool warm_start = false;
};

/// Iterate step_chemo until max |dc|/dt_outer < tol. Throws ConvergenceError
/// carrying the final residual when max_steps is exhausted.
SteadyResult relax_to_steady(const ChemoState& st, const ChemoParams& cp,
                             const SteadyOptions& opt = {});

}  // namespace bcm
