#include "bcm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bcm/errors.hpp"

namespace bcm {

std::pair<double, double> centroid(const ScalarField& phi) {
  const ScalarField h = smooth_h(phi);
  const double mass = integrate(h);
  if (!(mass > 0.0)) throw ContractError("centroid of an empty phase is undefined");
  const GridSpec& g = phi.spec();
  const NodeArray<double> w = quadrature_weights(g) * h.values();
  double sx = 0.0, sy = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      sx += w(j, i) * g.x(i);
      sy += w(j, i) * g.y(j);
    }
  const double total = w.sum();
  return {sx / total, sy / total};
}

Trajectory speed_series(const Trajectory& raw, int window) {
  if (raw.size() < 2) throw ContractError("speed_series needs at least two samples");
  if (window < 1) throw ConfigError("speed window must be >= 1");
  const std::size_t n = raw.size();
  std::vector<double> inst(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    const double dt = raw[b].time - raw[a].time;
    if (!(dt > 0.0)) throw ContractError("trajectory times must be strictly increasing");
    inst[i] = std::hypot(raw[b].centroid_x - raw[a].centroid_x,
                         raw[b].centroid_y - raw[a].centroid_y) / dt;
  }
  Trajectory out = raw;
  const int half = window / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double s = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) s += inst[k];
    out[i].speed = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

Section cross_section(const ScalarField& f, double y) {
  const GridSpec& g = f.spec();
  Section s;
  s.x.resize(g.nx);
  s.value.resize(g.nx);
  if (g.is_1d()) {
    if (std::abs(y - g.y0) > 1e-12) throw std::out_of_range("cross_section: y outside the grid");
    for (int i = 0; i < g.nx; ++i) {
      s.x[i] = g.x(i);
      s.value[i] = f(i, 0);
    }
    return s;
  }
  const double u = (y - g.y0) / g.dx;
  if (!(u >= -1e-9 && u <= g.ny - 1 + 1e-9)) throw std::out_of_range("cross_section: y outside the grid");
  int j0 = std::clamp(static_cast<int>(std::floor(u)), 0, g.ny - 2);
  const double t = std::clamp(u - j0, 0.0, 1.0);
  for (int i = 0; i < g.nx; ++i) {
    s.x[i] = g.x(i);
    s.value[i] = (1.0 - t) * f(i, j0) + t * f(i, j0 + 1);
  }
  return s;
}

double confinement_metric(const ScalarField& c, const PhaseSet& ps) {
  require_same_grid(c, ps.epithelium);
  const GridSpec& g = ps.spec();
  NodeArray<double> cell_max = NodeArray<double>::Zero(g.ny, g.nx);
  for (const auto& p : ps.phases) cell_max = cell_max.max(p.phi.values());
  const NodeArray<double> any_max = cell_max.max(ps.epithelium.values());

  const auto interior = cell_max > kInteriorThreshold;
  const auto exterior = any_max < kExteriorThreshold;
  const Eigen::Index n_in = interior.count();
  if (n_in == 0 || exterior.count() == 0)
    throw ContractError("confinement metric: empty interior or exterior region");
  const double mean_in = interior.select(c.values(), 0.0).sum() / static_cast<double>(n_in);
  const double max_out = exterior.select(c.values(), -std::numeric_limits<double>::infinity()).maxCoeff();
  if (!(max_out > 0.0)) throw ContractError("confinement metric: no extracellular concentration");
  return mean_in / max_out;
}

double mass_balance_residual(const ChemoState& st, const ChemoParams& cp) {
  const double src = integrate(st.source);
  if (!(src > 0.0)) throw ContractError("mass balance residual undefined without a source");
  return std::abs(cp.k * integrate(st.c) - src) / src;
}

CorridorProfile corridor_profile(const ScalarField& c, const PhaseSet& ps, double y) {
  require_same_grid(c, ps.epithelium);
  const int oct = ps.index_of(CellType::Oocyte);
  if (oct < 0) throw StructuralError("corridor profile needs an oocyte phase");
  const GridSpec& g = ps.spec();
  const int j = std::clamp(static_cast<int>(std::lround((y - g.y0) / g.dx)), 0, g.ny - 1);

  // Anterior-most oocyte node on the row; walk away from it.
  int start = -1;
  for (int i = 0; i < g.nx; ++i)
    if (ps[oct].phi(i, j) >= 0.5) {
      start = i;
      break;
    }
  if (start < 0) throw ContractError("corridor row does not meet the oocyte");

  CorridorProfile prof;
  for (int i = start - 1; i >= 0; --i) {
    double m = ps.epithelium(i, j);
    for (const auto& p : ps.phases) m = std::max(m, p.phi(i, j));
    if (m >= kExteriorThreshold) continue;
    prof.distance.push_back(g.x(start) - g.x(i));
    prof.value.push_back(c(i, j));
  }
  if (prof.value.empty()) return prof;
  const double vmax = *std::max_element(prof.value.begin(), prof.value.end());
  for (std::size_t k = 1; k < prof.value.size(); ++k)
    prof.max_ripple = std::max(prof.max_ripple, (prof.value[k] - prof.value[k - 1]) / vmax);
  return prof;
}

}  // namespace bcm
