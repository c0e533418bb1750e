#include "parisi/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace parisi {
namespace {

void check_unit_interval(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::domain_error("mixing function argument must lie in [0,1], got " + std::to_string(s));
  }
}

std::vector<Term> canonical(std::vector<Term> coeffs) {
  for (const auto& t : coeffs) {
    if (t.p < 2) throw std::invalid_argument("p must be >= 2 (got p=" + std::to_string(t.p) + ")");
    if (!std::isfinite(t.c)) throw std::invalid_argument("coefficient c_p must be finite");
  }
  std::sort(coeffs.begin(), coeffs.end(), [](const Term& a, const Term& b) { return a.p < b.p; });
  for (std::size_t i = 1; i < coeffs.size(); ++i) {
    if (coeffs[i].p == coeffs[i - 1].p) {
      throw std::invalid_argument("duplicate degree p=" + std::to_string(coeffs[i].p));
    }
  }
  std::erase_if(coeffs, [](const Term& t) { return t.c == 0.0; });
  if (coeffs.empty()) throw std::invalid_argument("no nonzero coefficient");
  return coeffs;
}

}  // namespace

ModelDiagnostics validate(const std::vector<Term>& raw) {
  const auto coeffs = canonical(raw);
  ModelDiagnostics d;
  for (const auto& [p, c] : coeffs) {
    const double c2 = c * c;
    d.xi_at_one += c2;
    d.xi_prime_at_one += p * c2;
    d.xi_second_at_one += p * (p - 1) * c2;
    d.tail_sum += std::ldexp(c2, p);
  }
  return d;
}

MixingFunction::MixingFunction(std::vector<Term> coeffs, double h)
    : coeffs_(canonical(std::move(coeffs))), h_(h), diag_(validate(coeffs_)) {
  if (!std::isfinite(h)) throw std::invalid_argument("external field h must be finite");
}

MixingFunction MixingFunction::sk(double h) { return MixingFunction({{2, 1.0 / std::sqrt(2.0)}}, h); }

double MixingFunction::xi(double s) const {
  check_unit_interval(s);
  double acc = 0.0;
  for (const auto& [p, c] : coeffs_) acc += c * c * std::pow(s, p);
  return acc;
}

double MixingFunction::xi_prime(double s) const {
  check_unit_interval(s);
  double acc = 0.0;
  for (const auto& [p, c] : coeffs_) acc += p * c * c * std::pow(s, p - 1);
  return acc;
}

double MixingFunction::xi_second(double s) const {
  check_unit_interval(s);
  double acc = 0.0;
  for (const auto& [p, c] : coeffs_) acc += p * (p - 1) * c * c * std::pow(s, p - 2);
  return acc;
}

bool MixingFunction::all_even() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Term& t) { return t.p % 2 == 0; });
}

}  // namespace parisi
