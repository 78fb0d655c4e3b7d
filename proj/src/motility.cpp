#include "bcm/motility.hpp"

#include <cmath>

#include "bcm/errors.hpp"

namespace bcm {

void TimParams::validate() const {
  if (!(mu_bar_c >= 0.0)) throw ConfigError("tim.mu_bar_c must be non-negative");
  if (!(rho_n >= 1.0)) throw ConfigError("tim.rho_n must be >= 1");
  if (!(sign_eta >= 0.0)) throw ConfigError("tim.sign_eta must be non-negative");
  if (!(mu_c >= 0.0)) throw ConfigError("tim.mu_c must be non-negative");
  if (!std::isfinite(rho_K)) throw ConfigError("tim.rho_K must be finite");
}

double receptor_response(double c, const TimParams& tp) {
  if (c < 0.0) throw ContractError("receptor_response: negative concentration");
  if (!(tp.rho_K > 0.0)) throw ContractError("receptor_response: K is not calibrated");
  if (c == 0.0) return 0.0;
  // (c/K)^n / (1 + (c/K)^n), stable for large c.
  const double r = std::pow(c / tp.rho_K, tp.rho_n);
  return std::isinf(r) ? 1.0 : r / (1.0 + r);
}

double smoothed_sign(double x, double eta) {
  if (eta > 0.0) return std::tanh(x / eta);
  return static_cast<double>((x > 0.0) - (x < 0.0));
}

namespace {

NodeArray<double> response_field(const ScalarField& c, const TimParams& tp) {
  if (!(tp.rho_K > 0.0)) throw ContractError("receptor response K is not calibrated");
  const NodeArray<double> r = (c.values().max(0.0) / tp.rho_K).pow(tp.rho_n);
  return (r.isInf()).select(1.0, r / (1.0 + r));
}

}  // namespace

VectorField tim_flux(const ScalarField& phi_c, const std::vector<const ScalarField*>& neighbors,
                     const ScalarField& c, const TimParams& tp) {
  require_same_grid(phi_c, c);
  const GridSpec& g = phi_c.spec();
  NodeArray<double> contact = NodeArray<double>::Zero(g.ny, g.nx);
  for (const ScalarField* n : neighbors) {
    require_same_grid(*n, phi_c);
    contact += n->values();
  }
  contact *= phi_c.values();

  VectorField t = perp_gradient(phi_c);
  if (tp.perp == PerpConvention::Clockwise) {
    t.x.values() = -t.x.values();
    t.y.values() = -t.y.values();
  }
  const VectorField gc = gradient(c);
  const NodeArray<double> align = gc.x.values() * t.x.values() + gc.y.values() * t.y.values();
  const double eta = tp.sign_eta;
  const NodeArray<double> sign = align.unaryExpr([eta](double a) { return smoothed_sign(a, eta); });

  const NodeArray<double> weight = response_field(c, tp) * contact * sign;
  return {ScalarField(g, weight * t.x.values()), ScalarField(g, weight * t.y.values())};
}

ScalarField tim_force(const ScalarField& phi_c, const std::vector<const ScalarField*>& neighbors,
                      const ScalarField& c, const TimParams& tp) {
  ScalarField f = div_vector(tim_flux(phi_c, neighbors, c, tp));
  f.values() *= -tp.mu_bar_c;
  return f;
}

ScalarField classical_chemo_force(const ScalarField& phi_c, const ScalarField& c, double mu_c,
                                  const TimParams& tp) {
  if (!(mu_c >= 0.0)) throw ContractError("classical_chemo_force: mu_c must be non-negative");
  require_same_grid(phi_c, c);
  const NodeArray<double> weight = response_field(c, tp) * phi_c.values();
  VectorField gc = gradient(c);
  gc.x.values() *= weight;
  gc.y.values() *= weight;
  ScalarField f = div_vector(gc);
  f.values() *= -mu_c;
  return f;
}

}  // namespace bcm
