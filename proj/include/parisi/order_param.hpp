#pragma once

#include <span>
#include <utility>
#include <vector>

#include "parisi/model.hpp"

namespace parisi {

// Right-continuous, nonnegative, nondecreasing step function on [0,1):
// gamma(s) = values[j] on [breaks[j], breaks[j+1]) with breaks[0] = 0 and an
// implicit right end at 1. The representation is canonical: adjacent equal
// values are merged, so two functions are equal iff their representations are.
class StepOrderParam {
 public:
  StepOrderParam() : breaks_{0.0}, values_{0.0} {}

  // Takes (t_j, v_{j+1}) pairs in any order. Throws std::invalid_argument when
  // the first breakpoint is not 0, a breakpoint leaves [0,1), two values are
  // given for the same breakpoint, or the values decrease (the message names
  // the offending index in sorted order).
  explicit StepOrderParam(std::vector<std::pair<double, double>> pieces);
  StepOrderParam(std::vector<double> breaks, std::vector<double> values);

  static StepOrderParam constant(double v);

  double operator()(double s) const;

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t pieces() const { return values_.size(); }
  // Number of jumps k (pieces - 1).
  std::size_t jumps() const { return values_.size() - 1; }
  // Right end of piece j (1 for the last piece).
  double right_end(std::size_t j) const { return j + 1 < breaks_.size() ? breaks_[j + 1] : 1.0; }
  // gamma(1-), the value on the last piece.
  double sup() const { return values_.back(); }
  double integral() const;

  std::vector<std::pair<double, double>> to_pairs() const;

  bool operator==(const StepOrderParam&) const = default;

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

// Probability distribution function on [0,1] with finitely many atoms.
class DiscreteCDF {
 public:
  // (q_i, mass_i) pairs; masses must be nonnegative and sum to 1 within 1e-9.
  explicit DiscreteCDF(std::vector<std::pair<double, double>> atoms);

  static DiscreteCDF dirac(double q);

  // alpha(t) = total mass on [0, t].
  double operator()(double t) const;

  const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }

  // Smallest atom at which alpha reaches 1.
  double q_max() const { return atoms_.back().first; }

  // Effective coefficient beta * alpha restricted to [0,1).
  StepOrderParam scaled(double beta) const;

 private:
  std::vector<std::pair<double, double>> atoms_;
};

// L1 distance on [0,1), exact over the merged partition.
double l1_distance(const StepOrderParam& a, const StepOrderParam& b);

// Pointwise min(gamma, n).
StepOrderParam truncate(const StepOrderParam& gamma, double n);

// alpha_beta = gamma / beta on [0,1) plus the remaining mass at 1. Requires
// beta > gamma(1-).
DiscreteCDF embed_finite_beta(const StepOrderParam& gamma, double beta);

// sqrt(2 xi'(1) log 2) / (xi(1) - xi(s)); +infinity once the denominator
// vanishes (s -> 1).
double minimizer_envelope(const MixingFunction& m, double s);

}  // namespace parisi
