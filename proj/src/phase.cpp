#include "bcm/phase.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bcm/errors.hpp"

namespace bcm {

namespace {

int type_slot(CellType t) {
  if (t == CellType::Epithelium) throw StructuralError("epithelium has no pair coefficients");
  return static_cast<int>(t) - 1;
}

NodeArray<double> h_of(const NodeArray<double>& phi) {
  return phi.square() * (3.0 - 2.0 * phi);
}

}  // namespace

std::string to_string(CellType t) {
  switch (t) {
    case CellType::Epithelium: return "epithelium";
    case CellType::Nurse: return "nurse";
    case CellType::Cluster: return "cluster";
    case CellType::Oocyte: return "oocyte";
  }
  return "unknown";
}

CellType cell_type_from_string(const std::string& s) {
  if (s == "epithelium") return CellType::Epithelium;
  if (s == "nurse") return CellType::Nurse;
  if (s == "cluster") return CellType::Cluster;
  if (s == "oocyte") return CellType::Oocyte;
  throw ConfigError("unknown cell type '" + s + "'");
}

int PhaseSet::index_of(CellType t) const {
  for (std::size_t m = 0; m < phases.size(); ++m)
    if (phases[m].type == t) return static_cast<int>(m);
  return -1;
}

std::vector<std::size_t> PhaseSet::indices_of(CellType t) const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < phases.size(); ++m)
    if (phases[m].type == t) out.push_back(m);
  return out;
}

void PhaseSet::validate() const {
  epithelium.check_shape();
  for (const auto& p : phases) {
    require_same_grid(p.phi, epithelium);
    if (p.type == CellType::Epithelium)
      throw StructuralError("cell phases cannot carry the epithelium tag");
    if (!(p.target_volume >= 0.0)) throw StructuralError("target volume must be >= 0");
  }
}

EnergyParams EnergyParams::defaults() {
  EnergyParams ep;
  // clang-format off
  ep.beta << 0.25, 0.25, 0.25,
             0.25, 0.0,  0.3,
             0.25, 0.3,  0.0;
  ep.gamma << 0.003, 0.004, 0.008,
              0.004, 0.0,   0.005,
              0.008, 0.005, 0.0;
  // clang-format on
  return ep;
}

double EnergyParams::eps2_of(CellType t) const { return eps2[type_slot(t)]; }
double EnergyParams::beta_of(CellType a, CellType b) const { return beta(type_slot(a), type_slot(b)); }
double EnergyParams::gamma_of(CellType a, CellType b) const {
  return gamma(type_slot(a), type_slot(b));
}

double EnergyParams::effective_gamma(CellType a, CellType b) const {
  const double g = gamma_of(a, b);
  if (!cap_adhesion) return g;
  // max h'(phi) = 3/2 at phi = 1/2
  const double cap = kAdhesionCap * std::sqrt(eps2_of(a) * eps2_of(b)) / 2.25;
  return std::copysign(std::min(std::abs(g), cap), g);
}

double EnergyParams::max_eps2() const { return std::max({eps2[0], eps2[1], eps2[2]}); }

void EnergyParams::validate() const {
  for (double e : eps2)
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("energy.eps2 entries must be positive");
  if (!(mobility > 0.0)) throw ConfigError("energy mobility must be positive");
  for (double v : {alpha0, alpha, beta0, gamma0})
    if (!std::isfinite(v)) throw ConfigError("energy coefficients must be finite");
  if (!beta.allFinite() || !gamma.allFinite()) throw ConfigError("energy tables must be finite");
  if (!beta.isApprox(beta.transpose(), 0.0) || !gamma.isApprox(gamma.transpose(), 0.0))
    throw ConfigError("energy.beta and energy.gamma must be symmetric");
}

ScalarField smooth_h(const ScalarField& phi) { return {phi.spec(), h_of(phi.values())}; }

double volume(const ScalarField& phi) { return integrate(smooth_h(phi)); }

ScalarField occupancy(const PhaseSet& ps) {
  ScalarField xi(ps.spec());
  for (const auto& p : ps.phases) xi.values() += h_of(p.phi.values());
  return xi;
}

double chamber_area(const PhaseSet& ps) {
  return integrate(ScalarField(ps.spec(), 1.0 - h_of(ps.epithelium.values())));
}

double overlap(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  return integrate(ScalarField(a.spec(), h_of(a.values()) * h_of(b.values())));
}

CouplingTerms::CouplingTerms(const PhaseSet& ps, const EnergyParams& ep) : ps_(&ps), ep_(&ep) {
  ps.validate();
  const GridSpec& g = ps.spec();
  const ScalarField h0 = smooth_h(ps.epithelium);
  wall_ = ep.beta0 * h0.values() - ep.gamma0 * laplacian(h0).values();
  chamber_area_ = integrate(ScalarField(g, 1.0 - h0.values()));
  occupied_target_ = ps.occupied_target.value_or(chamber_area_);

  for (auto& a : h_by_type_) a = NodeArray<double>::Zero(g.ny, g.nx);
  for (auto& a : lap_h_by_type_) a = NodeArray<double>::Zero(g.ny, g.nx);

  h_.reserve(ps.size());
  lap_h_.reserve(ps.size());
  for (const auto& p : ps.phases) {
    ScalarField h = smooth_h(p.phi);
    ScalarField lh = laplacian(h);
    const double v = integrate(h);
    volumes_.push_back(v);
    total_volume_ += v;
    h_by_type_[type_slot(p.type)] += h.values();
    lap_h_by_type_[type_slot(p.type)] += lh.values();
    h_.push_back(std::move(h.values()));
    lap_h_.push_back(std::move(lh.values()));
  }
}

ScalarField CouplingTerms::field(std::size_t m) const {
  if (m >= ps_->size()) throw StructuralError("coupling_F: phase index out of range");
  const Phase& p = ps_->phases[m];
  const EnergyParams& ep = *ep_;
  const int tm = type_slot(p.type);

  const double scalar_part = 2.0 * ep.alpha * (volumes_[m] - p.target_volume) +
                             2.0 * ep.alpha0 * (total_volume_ - occupied_target_);

  NodeArray<double> f = wall_ + scalar_part;
  for (int t = 0; t < 3; ++t) {
    const double b = ep.beta(tm, t);
    const double c = ep.effective_gamma(p.type, static_cast<CellType>(t + 1));
    if (t == tm) {
      // Pair sums run over the other cells only.
      if (b != 0.0) f += b * (h_by_type_[t] - h_[m]);
      if (c != 0.0) f -= c * (lap_h_by_type_[t] - lap_h_[m]);
    } else {
      if (b != 0.0) f += b * h_by_type_[t];
      if (c != 0.0) f -= c * lap_h_by_type_[t];
    }
  }
  return {ps_->spec(), std::move(f)};
}

ScalarField coupling_F(std::size_t m, const PhaseSet& ps, const EnergyParams& ep) {
  return CouplingTerms(ps, ep).field(m);
}

namespace {

NodeArray<double> rhs_from_terms(const Phase& p, const NodeArray<double>& F, const EnergyParams& ep) {
  const auto& phi = p.phi.values();
  const NodeArray<double> lap = laplacian(p.phi).values();
  return ep.mobility *
         (ep.eps2_of(p.type) * lap + phi * (1.0 - phi) * (phi - 0.5 - 6.0 * F));
}

}  // namespace

ScalarField phase_rhs(std::size_t m, const PhaseSet& ps, const EnergyParams& ep,
                      const ScalarField* external) {
  const CouplingTerms terms(ps, ep);
  NodeArray<double> r = rhs_from_terms(ps[m], terms.field(m).values(), ep);
  if (external != nullptr) {
    require_same_grid(*external, ps[m].phi);
    r += external->values();
  }
  return {ps.spec(), std::move(r)};
}

double phase_stability_bound(const GridSpec& g, const EnergyParams& ep) {
  return g.dx * g.dx / (4.0 * ep.mobility * ep.max_eps2());
}

double volume_stability_bound(const PhaseSet& ps, const EnergyParams& ep) {
  double k_max = 0.0, k_sum = 0.0;
  for (const auto& p : ps.phases) {
    const auto& phi = p.phi.values();
    // h'(phi) phi (1 - phi) = 6 phi^2 (1 - phi)^2
    const double k = integrate(ScalarField(ps.spec(), 6.0 * (phi * (1.0 - phi)).square()));
    k_max = std::max(k_max, k);
    k_sum += k;
  }
  const double lambda =
      12.0 * ep.mobility * (std::abs(ep.alpha) * k_max + std::abs(ep.alpha0) * k_sum);
  if (!(lambda > 0.0)) return std::numeric_limits<double>::infinity();
  return 2.0 / lambda;
}

PhaseSet step_phases(const PhaseSet& ps, const EnergyParams& ep, double dt,
                     const std::map<std::size_t, ScalarField>& externals,
                     PhaseStepReport* report) {
  if (!(dt > 0.0)) throw ConfigError("step_phases: dt must be positive");
  const double bound = phase_stability_bound(ps.spec(), ep);
  if (dt > bound) {
    std::ostringstream msg;
    msg << "phase time step " << dt << " exceeds the explicit stability bound dx^2/(4 mu eps^2) = "
        << bound;
    throw ConfigError(msg.str());
  }
  for (const auto& [m, f] : externals) {
    if (m >= ps.size()) throw StructuralError("external force for unknown phase");
    require_same_grid(f, ps[m].phi);
  }

  const CouplingTerms terms(ps, ep);
  PhaseSet next = ps;
  PhaseStepReport rep;
  rep.min_phi = 1.0;
  rep.max_phi = 0.0;
  for (std::size_t m = 0; m < ps.size(); ++m) {
    NodeArray<double> r = rhs_from_terms(ps[m], terms.field(m).values(), ep);
    if (auto it = externals.find(m); it != externals.end()) r += it->second.values();
    rep.max_rate = std::max(rep.max_rate, r.abs().maxCoeff());
    auto& phi = next[m].phi.values();
    phi += dt * r;
    next[m].target_volume += dt * ps[m].target_rate;
    rep.min_phi = std::min(rep.min_phi, phi.minCoeff());
    rep.max_phi = std::max(rep.max_phi, phi.maxCoeff());
  }
  rep.overshoot = rep.min_phi < kPhiLowerBand || rep.max_phi > kPhiUpperBand;
  if (report != nullptr) *report = rep;
  return next;
}

int phase_substeps(const PhaseSet& ps, const EnergyParams& ep, double dt, double safety) {
  if (!(dt > 0.0)) throw ConfigError("phase step must be positive");
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("phase step safety must lie in (0, 1]");
  const double limit =
      safety * std::min(phase_stability_bound(ps.spec(), ep), volume_stability_bound(ps, ep));
  return std::max(1, static_cast<int>(std::ceil(dt / limit * (1.0 - 1e-12))));
}

PhaseSet advance_phases(const PhaseSet& ps, const EnergyParams& ep, double dt, double safety,
                        const std::map<std::size_t, ScalarField>& externals,
                        PhaseStepReport* report) {
  const int n = phase_substeps(ps, ep, dt, safety);
  const double h = dt / n;
  PhaseSet cur = ps;
  PhaseStepReport total;
  total.min_phi = 1.0;
  total.max_phi = 0.0;
  for (int s = 0; s < n; ++s) {
    PhaseStepReport r;
    cur = step_phases(cur, ep, h, externals, &r);
    total.max_rate = std::max(total.max_rate, r.max_rate);
    total.min_phi = std::min(total.min_phi, r.min_phi);
    total.max_phi = std::max(total.max_phi, r.max_phi);
    total.overshoot = total.overshoot || r.overshoot;
  }
  if (report != nullptr) *report = total;
  return cur;
}

}  // namespace bcm
