#pragma once

#include "parisi/model.hpp"
#include "parisi/order_param.hpp"
#include "parisi/pde.hpp"

namespace parisi {

struct FunctionalValue {
  double value = 0.0;
  double pde_value = 0.0;   // Psi(0, h)
  double correction = 0.0;  // (1/2) int_0^1 t xi''(t) eta(t) dt
  double entropy = 0.0;     // log 2 / beta at finite beta, 0 at zero temperature
  SpaceGrid grid;
};

// (1/2) int_0^1 t xi''(t) gamma(t) dt in closed form via A(t) = t xi'(t) - xi(t).
double correction_integral(const MixingFunction& m, const StepOrderParam& gamma);

// P(gamma) = Psi_gamma(0,h) - (1/2) int t xi'' gamma.
FunctionalValue parisi_zero_t(const MixingFunction& m, const StepOrderParam& gamma,
                              const SpaceGrid& g);

// P_beta(alpha) = log 2 / beta + Psi_{alpha,beta}(0,h) - (1/2) int beta alpha(s) s xi''(s) ds.
FunctionalValue parisi_finite_beta(const MixingFunction& m, const DiscreteCDF& alpha, double beta,
                                   const SpaceGrid& g);

// Same, with the coefficient beta*alpha on [0,1) given directly as a step
// function bounded by beta (alpha reaches 1 at the latest at s = 1).
FunctionalValue parisi_finite_beta_scaled(const MixingFunction& m, const StepOrderParam& eta,
                                          double beta, const SpaceGrid& g);

}  // namespace parisi
