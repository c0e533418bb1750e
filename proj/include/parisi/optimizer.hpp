#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "parisi/functional.hpp"
#include "parisi/model.hpp"
#include "parisi/order_param.hpp"
#include "parisi/pde.hpp"

namespace parisi {

struct OptimizerConfig {
  int k = 0;  // number of jumps
  int restarts = 4;
  int max_iters = 2000;
  double f_tol = 1e-9;
  // Per-piece cap from the minimizer envelope at the piece's left endpoint,
  // combined with global_cap.
  bool envelope_cap = true;
  double global_cap = 50.0;
  std::uint64_t seed = 1;
  int threads = 1;
  // Grid used during the search; the reference grid re-evaluates the winner.
  std::optional<SpaceGrid> search_grid;
};

struct RestartTrace {
  int restart = 0;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct OptimizationResult {
  StepOrderParam gamma;  // zero temperature: gamma; finite beta: beta * alpha on [0,1)
  std::optional<DiscreteCDF> alpha;
  double beta = 0.0;
  double value = 0.0;  // re-evaluated on the reference grid
  FunctionalValue detail;
  std::vector<RestartTrace> trace;
  bool converged = false;
  // Finite beta only: q_{P,beta} and the largest excess of beta*alpha over
  // the minimizer envelope.
  double q_max = 1.0;
  double envelope_excess = 0.0;
};

// Derivative-free simplex search. Returns the best point; `evaluations`
// counts calls to f.
struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step, int max_evals, double f_tol);

// Maps 2k+1 unconstrained reals to a k-jump order parameter: k breakpoints via
// a softmax of gaps, values via squared cumulative increments, each value
// projected onto the cap function cap(left endpoint).
class StepParameterization {
 public:
  StepParameterization(int k, std::function<double(double)> cap);

  int dimension() const { return 2 * k_ + 1; }
  int jumps() const { return k_; }
  StepOrderParam decode(const std::vector<double>& params) const;
  // Inverse of decode for any gamma with at most k jumps; pieces are split to
  // reach exactly k jumps.
  std::vector<double> encode(const StepOrderParam& gamma) const;

 private:
  int k_;
  std::function<double(double)> cap_;
};

// Per-piece cap used for zero temperature search.
std::function<double(double)> zero_t_cap(const MixingFunction& m, const OptimizerConfig& cfg);

OptimizationResult minimize_zero_t(const MixingFunction& m, const OptimizerConfig& cfg,
                                   const SpaceGrid& g,
                                   const std::optional<StepOrderParam>& warm_start = std::nullopt);

OptimizationResult minimize_finite_beta(const MixingFunction& m, double beta,
                                        const OptimizerConfig& cfg, const SpaceGrid& g,
                                        const std::optional<StepOrderParam>& warm_start = std::nullopt);

struct GseRow {
  int k = 0;
  double value = 0.0;
  StepOrderParam gamma;
  bool converged = false;
};

struct GseReport {
  std::vector<GseRow> rows;
  double estimate = 0.0;      // best optimum (an upper bound on the ground state energy)
  double extrapolated = 0.0;  // geometric extrapolation of the k-sequence
  double grid_error = 0.0;    // |P(best) - P(best) on the refined grid|
  double error_bar = 0.0;
  bool plateau = false;
};

GseReport gse_estimate(const MixingFunction& m, int k_max, const OptimizerConfig& cfg,
                       const SpaceGrid& g);

}  // namespace parisi
