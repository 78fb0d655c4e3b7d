#pragma once

// Contact-guided migration: the tangential interface migration (TIM) force
// transports cluster material along its contact band with neighbouring cells,
// in the tangential direction of increasing chemoattractant.

#include <vector>

#include "bcm/grid.hpp"

namespace bcm {

enum class Activation { AfterChemoSteady, AtTime };
enum class PerpConvention { CounterClockwise, Clockwise };

struct TimParams {
  double mu_bar_c = 0.005;
  /// Hill half-saturation; <= 0 means "calibrate at activation".
  double rho_K = 0.0;
  double rho_n = 2.0;
  double sign_eta = 1e-3;
  Activation activation = Activation::AfterChemoSteady;
  double activation_time = 0.0;  ///< used with Activation::AtTime
  bool nurse_only = false;       ///< drop the oocyte from the neighbour set
  PerpConvention perp = PerpConvention::CounterClockwise;
  /// Bulk chemotaxis comparison force (off by default).
  bool classical = false;
  double mu_c = 0.045;

  void validate() const;  // throws ConfigError
};

/// rho(c) = c^n / (K^n + c^n). Throws ContractError for c < 0.
double receptor_response(double c, const TimParams& tp);

/// tanh(x/eta), or the exact sign (sgn(0) = 0) when eta == 0.
double smoothed_sign(double x, double eta);

/// Node-valued TIM flux rho(c) phi_c (sum_j phi_j) sign(grad c . t) t with
/// t = (grad phi_c)^perp; negative concentrations are read as zero.
VectorField tim_flux(const ScalarField& phi_c, const std::vector<const ScalarField*>& neighbors,
                     const ScalarField& c, const TimParams& tp);

/// -mu_bar_c div(tim_flux), assembled from face-averaged fluxes.
ScalarField tim_force(const ScalarField& phi_c, const std::vector<const ScalarField*>& neighbors,
                      const ScalarField& c, const TimParams& tp);

/// -mu_c div(rho(c) phi_c grad c): drives the cluster up the gradient
/// irrespective of contacts.
ScalarField classical_chemo_force(const ScalarField& phi_c, const ScalarField& c, double mu_c,
                                  const TimParams& tp);

}  // namespace bcm
