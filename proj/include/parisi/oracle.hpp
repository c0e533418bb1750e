#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "parisi/model.hpp"

namespace parisi {

using Spins = std::vector<std::int8_t>;

// One realization of H_N(sigma) = sum_p c_p N^{-(p-1)/2} sum_{i_1..i_p} g sigma_{i_1}..sigma_{i_p}
// + h sum_i sigma_i, with the coupling tensors kept over all ordered tuples.
struct DisorderSample {
  int n = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  std::vector<Term> terms;
  std::vector<std::vector<double>> tensors;  // tensors[k] has n^p entries, i_1 slowest

  // Direct evaluation over every ordered tuple.
  double energy(std::span<const std::int8_t> sigma) const;
};

// Tensor entries above this count are refused.
inline constexpr double kTensorBudget = 1e9;

DisorderSample sample_disorder(const MixingFunction& m, int n, std::uint64_t seed);
// Fixed couplings, for hand-checked instances.
DisorderSample make_disorder(const MixingFunction& m, int n, std::vector<std::vector<double>> tensors);

// H_N with sigma_i^2 = 1 applied: constant + linear + pair couplings (i < j)
// + monomials of degree >= 3.
struct ReducedHamiltonian {
  struct Monomial {
    std::vector<int> sites;
    double coeff = 0.0;
  };
  int n = 0;
  double constant = 0.0;
  std::vector<double> linear;
  std::vector<double> pair;  // symmetric n x n, zero diagonal; energy counts i < j once
  std::vector<Monomial> higher;
  bool even = false;  // H(-sigma) = H(sigma)

  double energy(std::span<const std::int8_t> sigma) const;
};

ReducedHamiltonian reduce(const DisorderSample& d);

struct GroundState {
  double energy_per_spin = 0.0;  // L_N = max_sigma H_N(sigma) / N
  Spins sigma;
};

// Largest N handled by exhaustive enumeration.
inline constexpr int kMaxEnumeration = 28;
inline constexpr int kMaxFreeEnergyN = 24;

// Gray-code enumeration with incremental energy updates. The sigma -> -sigma
// shortcut is used only when `use_symmetry` and the Hamiltonian is even.
GroundState ground_state_exhaustive(const DisorderSample& d, bool use_symmetry = true);

// Re-evaluates every configuration from the raw tensors (N <= 20).
GroundState ground_state_bruteforce(const DisorderSample& d);

// F_N(beta) = (1/(beta N)) log sum_sigma exp(beta H_N(sigma)) by exhaustive
// log-sum-exp; also returns the ground state from the same pass.
struct ExhaustiveResult {
  GroundState ground;
  double free_energy = 0.0;
};
ExhaustiveResult free_energy_exhaustive(const DisorderSample& d, double beta);

struct AnnealSchedule {
  double beta_start = 0.1;
  double beta_end = 8.0;
  int sweeps = 1000;
  int restarts = 10;
};

struct AnnealResult {
  GroundState best;
  std::vector<double> best_so_far;  // after each restart, per spin
};

// Single-spin-flip Metropolis annealing; returns the best configuration seen
// (a lower bound on L_N).
AnnealResult ground_state_anneal(const DisorderSample& d, const AnnealSchedule& schedule,
                                 std::uint64_t seed);

struct CovarianceProbe {
  double overlap = 0.0;
  double estimate = 0.0;  // mean of X(s1) X(s2) / N
  double std_error = 0.0;
  double expected = 0.0;  // xi(R)
  bool pass = false;
};

struct CovarianceReport {
  int n = 0;
  int samples = 0;
  std::vector<CovarianceProbe> probes;
  double max_deviation = 0.0;
  bool pass = false;
};

// Monte Carlo check of E X(s1) X(s2) = N xi(R_12) at 3 standard errors.
// Overlaps must be reachable at this N (N (1 - R) / 2 integral).
CovarianceReport covariance_check(const MixingFunction& m, int n, int samples, std::uint64_t seed,
                                  std::vector<double> overlaps = {-1.0, -0.5, 0.0, 0.5, 1.0},
                                  int threads = 1);

struct OracleRow {
  std::uint64_t seed = 0;
  int n = 0;
  double ground = 0.0;       // L_N
  double centered = 0.0;     // L_N minus the sigma-independent part of H_N / N
  std::optional<double> free_energy;
};

struct OracleResult {
  int n = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::optional<double> beta;
  std::vector<OracleRow> rows;
  double mean = 0.0;  // disorder mean of L_N
  double std_error = 0.0;
  // Same mean with the zero-mean constant removed per sample (lower variance).
  double centered_mean = 0.0;
  double centered_std_error = 0.0;
  bool sandwich_ok = true;  // L_N <= F_N <= L_N + log 2 / beta on every sample
};

OracleResult run_oracle(const MixingFunction& m, int n, int samples, std::uint64_t seed,
                        std::optional<double> beta = std::nullopt, int threads = 1);

struct Extrapolation {
  double a = 0.0;  // N -> infinity intercept
  double a_error = 0.0;
  double b = 0.0;
  double omega = 2.0 / 3.0;
  double chi2_reduced = 0.0;
  bool degenerate = false;  // residuals exceed the standard errors
};

// Weighted least squares of mean_N ~ a + b N^{-omega}; needs >= 3 distinct N.
// Standard errors <= 0 switch to unit weights.
Extrapolation extrapolate_gse(std::span<const int> ns, std::span<const double> means,
                              std::span<const double> std_errors, double omega = 2.0 / 3.0);
// Uses the centered means when `centered`.
Extrapolation extrapolate_gse(const std::vector<OracleResult>& results, double omega = 2.0 / 3.0,
                              bool centered = true);

}  // namespace parisi
