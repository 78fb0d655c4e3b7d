#pragma once

// Multiphase-field cell geometry: every cell is a field phi_m in [0, 1]
// (1 inside), the epithelial wall phi_0 is fixed, and each cell relaxes by
// the gradient flow of an energy with interface, double-well, volume,
// exclusion and adhesion contributions.

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcm/grid.hpp"

namespace bcm {

enum class CellType : int { Epithelium = 0, Nurse = 1, Cluster = 2, Oocyte = 3 };

std::string to_string(CellType t);
CellType cell_type_from_string(const std::string& s);

struct Phase {
  ScalarField phi;
  CellType type = CellType::Nurse;
  double target_volume = 0.0;
  /// dV/dt of the target; zero keeps the target constant.
  double target_rate = 0.0;
};

struct PhaseSet {
  std::vector<Phase> phases;
  ScalarField epithelium;  ///< phi_0: ~1 outside the chamber, ~0 inside
  /// Reference of the global occupancy term. Unset means the chamber area
  /// (integral of 1 - h(phi_0)).
  std::optional<double> occupied_target;

  std::size_t size() const { return phases.size(); }
  const GridSpec& spec() const { return epithelium.spec(); }
  const Phase& operator[](std::size_t m) const { return phases.at(m); }
  Phase& operator[](std::size_t m) { return phases.at(m); }

  /// Index of the first phase with the given type, or -1.
  int index_of(CellType t) const;
  std::vector<std::size_t> indices_of(CellType t) const;

  /// Shapes agree, targets are non-negative, no phase is tagged Epithelium.
  void validate() const;
};

/// Symmetric 3x3 coefficient table indexed by (type-1, type-1).
using PairMatrix = Eigen::Matrix3d;

struct EnergyParams {
  std::array<double, 3> eps2{0.001, 0.001, 0.0005};  ///< Nurse, Cluster, Oocyte
  double mobility = 1.0;
  double alpha0 = 100.0;
  double alpha = 100.0;
  double beta0 = 0.9;
  PairMatrix beta = PairMatrix::Zero();
  double gamma0 = 0.007;
  PairMatrix gamma = PairMatrix::Zero();
  /// Clip |gamma(a, b)| to kAdhesionCap * eps_a eps_b / max(h')^2 so the
  /// cross-diffusion between overlapping phases stays well posed.
  bool cap_adhesion = true;

  /// Default interaction coefficients.
  static EnergyParams defaults();

  double eps2_of(CellType t) const;
  double beta_of(CellType a, CellType b) const;
  double gamma_of(CellType a, CellType b) const;
  /// gamma after the optional well-posedness cap.
  double effective_gamma(CellType a, CellType b) const;
  double max_eps2() const;

  /// Symmetric tables, finite entries, positive eps2; throws ConfigError.
  void validate() const;
};

inline constexpr double kAdhesionCap = 0.9;

/// h(phi) = phi^2 (3 - 2 phi).
constexpr double smooth_h(double phi) { return phi * phi * (3.0 - 2.0 * phi); }

ScalarField smooth_h(const ScalarField& phi);

/// V = integral of h(phi).
double volume(const ScalarField& phi);

/// xi = sum over cells (epithelium excluded) of h(phi_m).
ScalarField occupancy(const PhaseSet& ps);

/// Integral of (1 - h(phi_0)): the area available inside the chamber.
double chamber_area(const PhaseSet& ps);

/// Shared per-step quantities of the coupling functional. Built once per
/// step and queried for every phase.
class CouplingTerms {
 public:
  CouplingTerms(const PhaseSet& ps, const EnergyParams& ep);

  /// Constraint functional F for phase m: d(energy)/d(h(phi_m)).
  ScalarField field(std::size_t m) const;

  double volume(std::size_t m) const { return volumes_.at(m); }
  double total_volume() const { return total_volume_; }
  double chamber_area() const { return chamber_area_; }
  /// Value the total cell volume is driven towards by the alpha0 term.
  double occupied_target() const { return occupied_target_; }

 private:
  const PhaseSet* ps_;
  const EnergyParams* ep_;
  std::vector<double> volumes_;
  double total_volume_ = 0.0;
  double chamber_area_ = 0.0;
  double occupied_target_ = 0.0;
  NodeArray<double> wall_;  // beta0 h(phi_0) - gamma0 lap h(phi_0)
  std::vector<NodeArray<double>> h_, lap_h_;
  std::array<NodeArray<double>, 3> h_by_type_, lap_h_by_type_;
};

/// F(phi_m, phi_0) assembled from scratch; see CouplingTerms.
ScalarField coupling_F(std::size_t m, const PhaseSet& ps, const EnergyParams& ep);

/// d(phi_m)/dt = mobility [eps^2 lap phi + phi (1 - phi)(phi - 1/2 - 6 F)] + external.
ScalarField phase_rhs(std::size_t m, const PhaseSet& ps, const EnergyParams& ep,
                      const ScalarField* external = nullptr);

/// Largest stable explicit step for the interface term: dx^2 / (4 mu max eps^2).
double phase_stability_bound(const GridSpec& g, const EnergyParams& ep);

/// Largest forward-Euler step for which the linearised volume feedback
/// (alpha and alpha0 terms) stays stable: 2 / (12 mu (alpha max_m K_m +
/// alpha0 sum_m K_m)) with K_m = integral of h'(phi_m) phi_m (1 - phi_m).
/// Infinite when there is no feedback.
double volume_stability_bound(const PhaseSet& ps, const EnergyParams& ep);

struct PhaseStepReport {
  double max_rate = 0.0;  ///< max |d phi / dt| over all cells and nodes
  double min_phi = 0.0;
  double max_phi = 0.0;
  bool overshoot = false;  ///< some phi left [-0.05, 1.05]
};

inline constexpr double kPhiLowerBand = -0.05;
inline constexpr double kPhiUpperBand = 1.05;

/// One forward-Euler step of every cell phase; phi_0 is copied unchanged.
/// Throws ConfigError when dt exceeds phase_stability_bound.
PhaseSet step_phases(const PhaseSet& ps, const EnergyParams& ep, double dt,
                     const std::map<std::size_t, ScalarField>& externals = {},
                     PhaseStepReport* report = nullptr);

/// Number of equal forward-Euler steps needed to cover dt while staying
/// below safety times both stability bounds.
int phase_substeps(const PhaseSet& ps, const EnergyParams& ep, double dt, double safety);

/// Advances every cell by dt in phase_substeps() equal steps; externals are
/// held fixed over dt. The report aggregates over the sub-steps.
PhaseSet advance_phases(const PhaseSet& ps, const EnergyParams& ep, double dt, double safety,
                        const std::map<std::size_t, ScalarField>& externals = {},
                        PhaseStepReport* report = nullptr);

/// Overlap integral of h(phi_a) h(phi_b).
double overlap(const ScalarField& a, const ScalarField& b);

}  // namespace bcm
