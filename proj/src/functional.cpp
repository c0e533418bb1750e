#include "parisi/functional.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace parisi {
namespace {

double antiderivative(const MixingFunction& m, double t) { return t * m.xi_prime(t) - m.xi(t); }

}  // namespace

double correction_integral(const MixingFunction& m, const StepOrderParam& gamma) {
  double acc = 0.0;
  for (std::size_t j = 0; j < gamma.pieces(); ++j) {
    const double v = gamma.values()[j];
    if (v == 0.0) continue;
    acc += v * (antiderivative(m, gamma.right_end(j)) - antiderivative(m, gamma.breaks()[j]));
  }
  return 0.5 * acc;
}

FunctionalValue parisi_zero_t(const MixingFunction& m, const StepOrderParam& gamma,
                              const SpaceGrid& g) {
  FunctionalValue out;
  out.grid = g;
  out.pde_value = solve_at_origin(m, gamma, Boundary::kAbs, 0.0, g, m.h()).value;
  out.correction = correction_integral(m, gamma);
  out.value = out.pde_value - out.correction;
  return out;
}

FunctionalValue parisi_finite_beta_scaled(const MixingFunction& m, const StepOrderParam& eta,
                                          double beta, const SpaceGrid& g) {
  if (!(beta > 0.0)) throw std::invalid_argument("inverse temperature must be positive");
  if (eta.sup() > beta * (1.0 + 1e-12)) {
    throw std::invalid_argument("beta * alpha exceeds beta");
  }
  FunctionalValue out;
  out.grid = g;
  out.entropy = std::numbers::ln2 / beta;
  out.pde_value = solve_at_origin(m, eta, Boundary::kLogCosh, beta, g, m.h()).value;
  out.correction = correction_integral(m, eta);
  out.value = out.entropy + out.pde_value - out.correction;
  return out;
}

FunctionalValue parisi_finite_beta(const MixingFunction& m, const DiscreteCDF& alpha, double beta,
                                   const SpaceGrid& g) {
  if (!(beta > 0.0)) throw std::invalid_argument("inverse temperature must be positive");
  return parisi_finite_beta_scaled(m, alpha.scaled(beta), beta, g);
}

}  // namespace parisi
