#pragma once

#include <vector>

namespace parisi {

// One term c_p * (normalized p-tensor) of the mixed p-spin Hamiltonian.
struct Term {
  int p = 2;
  double c = 0.0;
};

struct ModelDiagnostics {
  double xi_at_one = 0.0;
  double xi_prime_at_one = 0.0;
  double xi_second_at_one = 0.0;
  double tail_sum = 0.0;  // sum_p 2^p c_p^2
};

// Checks the coefficient list and reports xi(1), xi'(1), xi''(1) and
// sum 2^p c_p^2. Throws std::invalid_argument on an empty (all-zero) list,
// p < 2 or repeated p.
ModelDiagnostics validate(const std::vector<Term>& coeffs);

// Mixing function xi(s) = sum_p c_p^2 s^p together with the external field h.
// Immutable after construction.
class MixingFunction {
 public:
  MixingFunction(std::vector<Term> coeffs, double h = 0.0);

  // Sherrington-Kirkpatrick: xi(s) = s^2 / 2.
  static MixingFunction sk(double h = 0.0);

  double xi(double s) const;
  double xi_prime(double s) const;
  double xi_second(double s) const;

  double h() const { return h_; }
  const std::vector<Term>& coeffs() const { return coeffs_; }
  const ModelDiagnostics& diagnostics() const { return diag_; }
  int max_degree() const { return coeffs_.back().p; }
  bool all_even() const;

 private:
  std::vector<Term> coeffs_;  // sorted by p, zero entries dropped
  double h_ = 0.0;
  ModelDiagnostics diag_;
};

}  // namespace parisi
