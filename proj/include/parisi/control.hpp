#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "parisi/model.hpp"
#include "parisi/order_param.hpp"
#include "parisi/pde.hpp"

namespace parisi {

// Admissible control |u| <= 1. Evaluated at the left end of each time step,
// so every policy is realized as a piecewise-constant adapted process.
class ControlPolicy {
 public:
  struct Constant {
    double u = 0.0;
  };
  struct Feedback {
    std::shared_ptr<const PdeSolution> sol;
  };
  struct Table {
    std::vector<double> times;   // ascending left edges of time cells
    std::vector<double> x_edges; // ascending interior edges of x cells
    std::vector<double> values;  // row-major [time cell][x cell]
  };

  static ControlPolicy constant(double u);
  static ControlPolicy feedback(std::shared_ptr<const PdeSolution> sol);
  static ControlPolicy table(Table t, std::string name = "table");
  // Uniform values in [-1,1] on n_t x n_x cells over [s,1] x [-x_range, x_range].
  static ControlPolicy random_table(std::uint64_t seed, double s, int n_t, int n_x, double x_range);

  double operator()(double t, double x) const;

  bool is_feedback() const { return std::holds_alternative<Feedback>(kind_); }
  const std::string& name() const { return name_; }

 private:
  ControlPolicy(std::variant<Constant, Feedback, Table> kind, std::string name)
      : kind_(std::move(kind)), name_(std::move(name)) {}

  std::variant<Constant, Feedback, Table> kind_;
  std::string name_;
};

// u*(r) = d/dx Psi(r, X(r)), read at the latest stored time <= r.
ControlPolicy feedback_policy(std::shared_ptr<const PdeSolution> sol);

struct McParams {
  int n_paths = 100000;
  int n_steps = 512;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n_paths = 0;
  int n_steps = 0;
  std::uint64_t seed = 0;
};

// Time grid on [s,1] containing every breakpoint of eta, uniform in the
// xi'-clock inside each piece. Piece step counts are even so that every
// other point forms the half-resolution grid.
std::vector<double> control_time_grid(const MixingFunction& m, const StepOrderParam& eta, double s,
                                      int n_steps);

// Monte Carlo estimate of F^{s,1}(u,x) = E[Psi(1, Y(1)) - (1/2) int eta xi'' u^2]
// with Y(r) = x + int eta xi'' u dr + int sqrt(xi'') dW. Throws
// std::invalid_argument when eta * (xi'(r+) - xi'(r)) > 0.1 on some step.
McEstimate simulate_functional(const PdeSolution& sol, const ControlPolicy& policy, double s,
                               double x, const McParams& mc);

struct DualityEstimate {
  double psi = 0.0;            // Psi(s,x) from the stored solution
  McEstimate right_side;       // E Psi(1,Y) - L + (1/2) int eta xi'' E(d_x Psi - u)^2
  McEstimate functional;       // E Psi(1,Y) - L, i.e. F(u)
  McEstimate gap;              // the duality-gap term
  McEstimate difference;       // right_side - psi
};

DualityEstimate duality_gap(const PdeSolution& sol, const ControlPolicy& policy, double s, double x,
                            const McParams& mc);

struct PolicyCheck {
  std::string name;
  McEstimate estimate;
  bool pass = false;
};

struct VariationalReport {
  double s = 0.0;
  double x = 0.0;
  double psi = 0.0;  // reference Psi(s,x) from the exact slab composition
  std::vector<PolicyCheck> suboptimal;
  McEstimate optimal;        // F(u*) at n_steps
  McEstimate optimal_half;   // F(u*) at n_steps / 2 on the same Brownian paths
  double bias_budget = 0.0;  // |F_n(u*) - F_{n/2}(u*)|
  bool optimal_pass = false;
  bool pass = false;
};

// Battery: constants -1, 0, 0.5, 1, `random_tables` random tables and u*.
VariationalReport verify_variational(const MixingFunction& m, const StepOrderParam& eta,
                                     Boundary kind, double beta, const SpaceGrid& g, double s,
                                     double x, const McParams& mc, int random_tables = 2);

}  // namespace parisi
