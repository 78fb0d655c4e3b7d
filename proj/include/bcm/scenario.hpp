#pragma once

// Initial conditions: the egg-chamber scene (epithelial wall, six nurse
// cells, the oocyte cap and the border-cell cluster) and the 1D moving
// tanh window.

#include <utility>
#include <vector>

#include "bcm/chemo.hpp"
#include "bcm/grid.hpp"
#include "bcm/phase.hpp"

namespace bcm {

struct Disc {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
};

/// Chamber geometry. The default layout is an approximation of the usual
/// stage-9 picture: elongated chamber, posterior oocyte cap at larger x,
/// a 2x3 nurse array and the cluster on the mid-line at the anterior pole.
struct SceneConfig {
  double extent = 5.0;
  double center_x = 2.5;
  double center_y = 2.5;
  double semi_a = 2.3;  ///< half length along x
  double semi_b = 1.7;  ///< half height along y
  /// tanh width of every seeded interface.
  double interface_width = 0.09;
  /// Posterior fraction of the long axis occupied by the oocyte.
  double oocyte_cap_fraction = 0.3;
  /// Extracellular gap left between neighbouring seeded cells.
  double gap = 0.1;
  /// Nurse seeds: centre and power-diagram weight radius. The cells tile the
  /// anterior part of the chamber.
  std::vector<Disc> nurses;
  /// Cluster seed; r <= 0 derives the radius from cluster_volume.
  Disc cluster{0.5, 2.5, 0.0};
  double cluster_volume = 0.15;
  /// Largest allowed pairwise seed overlap as a fraction of the smaller volume.
  double overlap_tolerance = 0.02;
  bool seed_cluster = true;
  bool seed_oocyte = true;

  Disc cluster_seed() const;

  static SceneConfig defaults();
  /// Cap line x coordinate (oocyte occupies x > cap_x inside the chamber).
  double cap_x() const { return center_x + semi_a * (1.0 - 2.0 * oocyte_cap_fraction); }
  /// Signed distance to the chamber wall, positive inside (first order).
  double chamber_distance(double x, double y) const;

  void validate() const;  // throws ConfigError
};

struct Window1D {
  double x0 = 5.0;
  double R = 1.0;
  double eps = 0.07;
  double D_phi = 1.0;
  double v = 0.5;

  /// sqrt(2 D_phi) eps
  double width() const;
  void validate() const;  // throws ConfigError
};

/// 1/2 [tanh((x - vt - (x0 - R))/w) - tanh((x - vt - (x0 + R))/w)].
double tanh_window(const Window1D& w, double t, double x);
ScalarField tanh_window(const Window1D& w, double t, const GridSpec& g);

/// max over interior nodes of |D_phi lap psi - f'(psi)/eps^2| with
/// f(psi) = (psi^2 - 1)^2 / 4, for a +-1 valued profile psi.
double ac_residual(const ScalarField& psi, const Window1D& w);

/// Single heteroclinic wall tanh((x - x_star)/width) sampled on g.
ScalarField ac_wall(const Window1D& w, double x_star, const GridSpec& g);

/// Seeded (unrelaxed) chamber phases in the order nurses, cluster, oocyte.
/// Target volumes are the seeded volumes except the cluster's, which is
/// sc.cluster_volume. Throws ConfigError on excessive seed overlap.
PhaseSet build_chamber(const SceneConfig& sc, const GridSpec& g);

/// Single-phase set holding the window at t = 0 and the matching chemo state:
/// c = cp.c0, D from the single-phase sigmoid, no source, right node held at
/// right_value.
std::pair<PhaseSet, ChemoState> build_1d_scene(const Window1D& w, const GridSpec& g,
                                               const ChemoParams& cp, double right_value = 1.0);

}  // namespace bcm
