#include "bcm/scenario.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bcm/errors.hpp"

namespace bcm {

SceneConfig SceneConfig::defaults() {
  SceneConfig sc;
  // Two rows of three nurse cells on either side of the mid-line corridor.
  for (double y : {1.85, 3.15})
    for (double x : {1.05, 1.85, 2.75}) sc.nurses.push_back({x, y, 0.4});
  return sc;
}

double SceneConfig::chamber_distance(double x, double y) const {
  const double u = (x - center_x) / semi_a;
  const double v = (y - center_y) / semi_b;
  const double r = std::sqrt(u * u + v * v);
  // F / |grad F| with F = r - 1: exact on the axes, first order elsewhere.
  const double gu = u / semi_a, gv = v / semi_b;
  const double gnorm = r > 0.0 ? std::sqrt(gu * gu + gv * gv) / r : 1.0 / std::min(semi_a, semi_b);
  return -(r - 1.0) / gnorm;
}

void SceneConfig::validate() const {
  if (!(extent > 0.0)) throw ConfigError("scene.extent must be positive");
  if (!(semi_a > 0.0 && semi_b > 0.0)) throw ConfigError("scene chamber semi-axes must be positive");
  if (center_x - semi_a < 0.0 || center_x + semi_a > extent || center_y - semi_b < 0.0 ||
      center_y + semi_b > extent)
    throw ConfigError("scene chamber does not fit in the domain");
  if (!(interface_width > 0.0)) throw ConfigError("scene.interface_width must be positive");
  if (!(oocyte_cap_fraction > 0.0 && oocyte_cap_fraction < 1.0))
    throw ConfigError("scene.oocyte_cap_fraction must lie in (0, 1)");
  if (!(cluster_volume > 0.0)) throw ConfigError("scene.cluster_volume must be positive");
  const auto inside = [&](const Disc& d, const char* what) {
    if (!(d.r > 0.0)) throw ConfigError(std::string("scene: ") + what + " radius must be positive");
    if (chamber_distance(d.x, d.y) < d.r)
      throw ConfigError(std::string("scene: ") + what + " seed does not lie inside the chamber");
  };
  for (const auto& n : nurses) inside(n, "nurse");
  if (seed_cluster) inside(cluster_seed(), "cluster");
  if (!(gap >= 0.0)) throw ConfigError("scene.gap must be non-negative");
  if (!(cluster.x < cap_x())) throw ConfigError("scene: cluster must sit anterior of the oocyte");
  for (std::size_t a = 0; a < nurses.size(); ++a) {
    if (!(nurses[a].x < cap_x()))
      throw ConfigError("scene: nurse seeds must lie anterior of the oocyte cap");
    for (std::size_t b = a + 1; b < nurses.size(); ++b)
      if (nurses[a].x == nurses[b].x && nurses[a].y == nurses[b].y)
        throw ConfigError("scene: coincident nurse seeds");
  }
}

double Window1D::width() const { return std::sqrt(2.0 * D_phi) * eps; }

void Window1D::validate() const {
  if (!(R > 0.0)) throw ConfigError("window.R must be positive");
  if (!(eps > 0.0)) throw ConfigError("window.eps must be positive");
  if (!(D_phi > 0.0)) throw ConfigError("window.D_phi must be positive");
  if (!std::isfinite(v) || !std::isfinite(x0)) throw ConfigError("window.x0 and window.v must be finite");
}

double tanh_window(const Window1D& w, double t, double x) {
  const double wb = w.width();
  const double s = x - w.v * t;
  return 0.5 * (std::tanh((s - (w.x0 - w.R)) / wb) - std::tanh((s - (w.x0 + w.R)) / wb));
}

ScalarField tanh_window(const Window1D& w, double t, const GridSpec& g) {
  return ScalarField::sample(g, [&](double x, double) { return tanh_window(w, t, x); });
}

ScalarField ac_wall(const Window1D& w, double x_star, const GridSpec& g) {
  const double wb = w.width();
  return ScalarField::sample(g, [&](double x, double) { return std::tanh((x - x_star) / wb); });
}

double ac_residual(const ScalarField& psi, const Window1D& w) {
  if (!psi.spec().is_1d()) throw StructuralError("ac_residual expects a 1D field");
  const ScalarField lap = laplacian(psi);
  const auto& p = psi.values();
  const NodeArray<double> fprime = p.cube() - p;
  const NodeArray<double> r = (w.D_phi * lap.values() - fprime / (w.eps * w.eps)).abs();
  return r.middleCols(1, psi.nx() - 2).maxCoeff();
}

namespace {

double seed_profile(double signed_distance, double width) {
  return 0.5 * (1.0 + std::tanh(signed_distance / width));
}

/// Signed distance (positive on a's side) to the power-diagram bisector of
/// two weighted seeds.
double power_bisector(const Disc& a, const Disc& b, double x, double y) {
  const double pa = (x - a.x) * (x - a.x) + (y - a.y) * (y - a.y) - a.r * a.r;
  const double pb = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) - b.r * b.r;
  return (pb - pa) / (2.0 * std::hypot(b.x - a.x, b.y - a.y));
}

}  // namespace

Disc SceneConfig::cluster_seed() const {
  Disc d = cluster;
  if (!(d.r > 0.0)) d.r = std::sqrt(cluster_volume / std::numbers::pi);
  return d;
}

PhaseSet build_chamber(const SceneConfig& sc, const GridSpec& g) {
  sc.validate();
  g.validate();
  if (g.is_1d()) throw StructuralError("build_chamber needs a 2D grid");
  const double w = sc.interface_width;
  const double half_gap = 0.5 * sc.gap;
  const double cap = sc.cap_x();
  const Disc cl = sc.cluster_seed();

  PhaseSet ps;
  ps.epithelium = ScalarField::sample(
      g, [&](double x, double y) { return seed_profile(-sc.chamber_distance(x, y), w); });

  // Nurse cells tile the anterior chamber (power diagram of their seeds),
  // minus the cluster disc; every cell is shrunk by half the gap.
  for (std::size_t m = 0; m < sc.nurses.size(); ++m) {
    const Disc& me = sc.nurses[m];
    Phase p{ScalarField::sample(g,
                                [&](double x, double y) {
                                  double d = std::min(sc.chamber_distance(x, y), cap - x);
                                  if (sc.seed_cluster)
                                    d = std::min(d, std::hypot(x - cl.x, y - cl.y) - cl.r - half_gap);
                                  for (std::size_t n = 0; n < sc.nurses.size(); ++n)
                                    if (n != m) d = std::min(d, power_bisector(me, sc.nurses[n], x, y));
                                  return seed_profile(d - half_gap, w);
                                }),
            CellType::Nurse, 0.0};
    p.target_volume = volume(p.phi);
    ps.phases.push_back(std::move(p));
  }
  if (sc.seed_cluster) {
    ps.phases.push_back({ScalarField::sample(g,
                                             [&](double x, double y) {
                                               return seed_profile(
                                                   cl.r - std::hypot(x - cl.x, y - cl.y), w);
                                             }),
                         CellType::Cluster, sc.cluster_volume});
  }
  if (sc.seed_oocyte) {
    Phase oocyte{ScalarField::sample(g,
                                     [&](double x, double y) {
                                       const double d = std::min(sc.chamber_distance(x, y), x - cap);
                                       return seed_profile(d - half_gap, w);
                                     }),
                 CellType::Oocyte, 0.0};
    oocyte.target_volume = volume(oocyte.phi);
    ps.phases.push_back(std::move(oocyte));
  }

  for (std::size_t a = 0; a < ps.size(); ++a)
    for (std::size_t b = a + 1; b < ps.size(); ++b) {
      const double ov = overlap(ps[a].phi, ps[b].phi);
      const double vmin = std::min(volume(ps[a].phi), volume(ps[b].phi));
      if (ov > sc.overlap_tolerance * vmin) {
        std::ostringstream msg;
        msg << "scene seeds " << a << " (" << to_string(ps[a].type) << ") and " << b << " ("
            << to_string(ps[b].type) << ") overlap by " << ov << ", above the tolerance";
        throw ConfigError(msg.str());
      }
    }
  ps.validate();
  return ps;
}

std::pair<PhaseSet, ChemoState> build_1d_scene(const Window1D& w, const GridSpec& g,
                                               const ChemoParams& cp, double right_value) {
  w.validate();
  if (!g.is_1d()) throw StructuralError("build_1d_scene needs a 1D grid");
  PhaseSet ps;
  ps.epithelium = ScalarField(g, 0.0);
  ScalarField phi = tanh_window(w, 0.0, g);
  const double v = volume(phi);
  ps.phases.push_back({std::move(phi), CellType::Cluster, v});

  ChemoState st;
  st.c = ScalarField(g, cp.c0);
  st.D = diffusivity_single(ps[0].phi, cp);
  st.source = ScalarField(g, 0.0);
  // c starts at c0 everywhere; the held value is imposed from the first sub-step.
  st.fixed_right = right_value;
  return {std::move(ps), std::move(st)};
}

}  // namespace bcm
