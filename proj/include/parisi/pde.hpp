#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "parisi/model.hpp"
#include "parisi/order_param.hpp"

namespace parisi {

// Terminal condition of the backward equation.
enum class Boundary {
  kAbs,      // Psi(1,x) = |x| (zero temperature)
  kLogCosh,  // Psi(1,x) = log cosh(beta x) / beta
};

class GridTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform symmetric grid on [-x_max, x_max] with an odd node count, so x = 0 is
// a node. Beyond x_max the solution is continued with slope +-1 up to
// x_max + extension_margin.
struct SpaceGrid {
  double x_max = 8.0;
  int n_x = 2049;
  int quad_nodes = 16;  // Gauss-Legendre points per panel at the terminal slab
  double extension_margin = 200.0;

  // x_max = |h| + 8 sqrt(xi'(1)).
  static SpaceGrid defaults(const MixingFunction& m, int n_x = 2049);

  // Throws std::invalid_argument for n_x even or < 3, quad_nodes < 8, or
  // x_max <= |h| + 6 sqrt(xi'(1)).
  void validate(const MixingFunction& m) const;

  // Same window, n_x -> 2 n_x - 1 and quad_nodes doubled.
  SpaceGrid refined() const;

  double dx() const { return 2.0 * x_max / (n_x - 1); }
  double node(int i) const { return -x_max + i * dx(); }
  int center() const { return (n_x - 1) / 2; }

  bool operator==(const SpaceGrid&) const = default;
};

struct PsiValue {
  double value = 0.0;
  double deriv = 0.0;
};

// Psi and d/dx Psi at one time on every grid node.
struct Layer {
  double t = 0.0;
  std::vector<double> value;
  std::vector<double> deriv;
};

// Terminal function and its derivative; derivative of |x| at 0 is 0.
PsiValue terminal_value(Boundary kind, double beta, double x);

// Solution of the Parisi equation with a step coefficient eta, stored at the
// breakpoints of eta, any requested extra times, and t = 1.
class PdeSolution {
 public:
  PdeSolution(MixingFunction model, StepOrderParam eta, Boundary kind, double beta, SpaceGrid grid,
              std::vector<Layer> layers);

  // Throws std::invalid_argument for a time that is not stored and
  // std::out_of_range beyond x_max + extension_margin.
  PsiValue eval(double t, double x) const;

  // Index of the stored layer with the largest time <= t.
  std::size_t layer_at_or_before(double t) const;
  PsiValue eval_layer(std::size_t index, double x) const;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<double> times() const;
  const MixingFunction& model() const { return model_; }
  const StepOrderParam& eta() const { return eta_; }
  Boundary boundary() const { return kind_; }
  double beta() const { return beta_; }
  const SpaceGrid& grid() const { return grid_; }

 private:
  MixingFunction model_;
  StepOrderParam eta_;
  Boundary kind_;
  double beta_;
  SpaceGrid grid_;
  std::vector<Layer> layers_;  // ascending in t; last one is t = 1
};

PdeSolution solve_zero_t(const MixingFunction& m, const StepOrderParam& gamma, const SpaceGrid& g,
                         std::span<const double> extra_times = {});

PdeSolution solve_finite_beta(const MixingFunction& m, const DiscreteCDF& alpha, double beta,
                              const SpaceGrid& g, std::span<const double> extra_times = {});

// General form: coefficient eta (gamma, or beta * alpha).
PdeSolution solve_parisi(const MixingFunction& m, const StepOrderParam& eta, Boundary kind,
                         double beta, const SpaceGrid& g, std::span<const double> extra_times = {});

// Psi(0, x) and its derivative without storing the layers. Only the nodes
// needed to interpolate at x are computed on the t = 0 layer.
PsiValue solve_at_origin(const MixingFunction& m, const StepOrderParam& eta, Boundary kind,
                         double beta, const SpaceGrid& g, double x);

struct LipschitzReport {
  double max_gap = 0.0;   // max over nodes of |Psi_gamma(0,x) - Psi_gamma'(0,x)|
  double bound = 0.0;     // 2 xi''(1) d(gamma, gamma')
  double distance = 0.0;  // d(gamma, gamma')
  double tolerance = 1e-6;
  bool violated = false;
};

LipschitzReport lipschitz_check(const MixingFunction& m, const StepOrderParam& a,
                                const StepOrderParam& b, const SpaceGrid& g,
                                double tolerance = 1e-6);

}  // namespace parisi
