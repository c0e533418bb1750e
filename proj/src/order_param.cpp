#include "parisi/order_param.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace parisi {

StepOrderParam::StepOrderParam(std::vector<double> breaks, std::vector<double> values) {
  if (breaks.size() != values.size()) {
    throw std::invalid_argument("order parameter needs one value per breakpoint");
  }
  std::vector<std::pair<double, double>> pieces;
  pieces.reserve(breaks.size());
  for (std::size_t i = 0; i < breaks.size(); ++i) pieces.emplace_back(breaks[i], values[i]);
  *this = StepOrderParam(std::move(pieces));
}

StepOrderParam::StepOrderParam(std::vector<std::pair<double, double>> pieces) {
  if (pieces.empty()) throw std::invalid_argument("order parameter has no pieces");
  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (pieces.front().first != 0.0) {
    throw std::invalid_argument("first breakpoint must be 0");
  }
  breaks_.clear();
  values_.clear();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto [t, v] = pieces[i];
    if (!(t >= 0.0 && t < 1.0)) {
      throw std::invalid_argument("breakpoint " + std::to_string(i) + " outside [0,1)");
    }
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("value " + std::to_string(i) + " must be finite and nonnegative");
    }
    if (!breaks_.empty() && t == breaks_.back()) {
      if (v != values_.back()) {
        throw std::invalid_argument("conflicting values at breakpoint " + std::to_string(i));
      }
      continue;
    }
    if (!values_.empty() && v < values_.back()) {
      throw std::invalid_argument("values must be nondecreasing: value " + std::to_string(i) +
                                  " is smaller than its predecessor");
    }
    if (!values_.empty() && v == values_.back()) continue;  // merge
    breaks_.push_back(t);
    values_.push_back(v);
  }
}

StepOrderParam StepOrderParam::constant(double v) { return StepOrderParam({{0.0, v}}); }

double StepOrderParam::operator()(double s) const {
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
  if (it == breaks_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

double StepOrderParam::integral() const {
  double acc = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j) acc += values_[j] * (right_end(j) - breaks_[j]);
  return acc;
}

std::vector<std::pair<double, double>> StepOrderParam::to_pairs() const {
  std::vector<std::pair<double, double>> out;
  for (std::size_t j = 0; j < values_.size(); ++j) out.emplace_back(breaks_[j], values_[j]);
  return out;
}

DiscreteCDF::DiscreteCDF(std::vector<std::pair<double, double>> atoms) {
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto [q, w] = atoms[i];
    if (!(q >= 0.0 && q <= 1.0)) {
      throw std::invalid_argument("atom " + std::to_string(i) + " outside [0,1]");
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("mass " + std::to_string(i) + " must be nonnegative");
    }
    total += w;
    if (w == 0.0) continue;
    if (!atoms_.empty() && atoms_.back().first == q) {
      atoms_.back().second += w;
    } else {
      atoms_.emplace_back(q, w);
    }
  }
  if (atoms_.empty() || std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("masses must sum to 1");
  }
  for (auto& a : atoms_) a.second /= total;
}

DiscreteCDF DiscreteCDF::dirac(double q) { return DiscreteCDF({{q, 1.0}}); }

double DiscreteCDF::operator()(double t) const {
  if (t >= 1.0) return 1.0;
  double acc = 0.0;
  for (const auto& [q, w] : atoms_) {
    if (q > t) break;
    acc += w;
  }
  return std::min(acc, 1.0);
}

StepOrderParam DiscreteCDF::scaled(double beta) const {
  std::vector<std::pair<double, double>> pieces{{0.0, 0.0}};
  double acc = 0.0;
  for (const auto& [q, w] : atoms_) {
    if (q >= 1.0) break;
    acc += w;
    const double v = beta * std::min(acc, 1.0);
    if (q == 0.0) {
      pieces.front().second = v;
    } else {
      pieces.emplace_back(q, v);
    }
  }
  return StepOrderParam(std::move(pieces));
}

double l1_distance(const StepOrderParam& a, const StepOrderParam& b) {
  std::vector<double> cuts = a.breaks();
  cuts.insert(cuts.end(), b.breaks().begin(), b.breaks().end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double t = cuts[i];
    acc += std::abs(a(t) - b(t)) * (cuts[i + 1] - t);
  }
  return acc;
}

StepOrderParam truncate(const StepOrderParam& gamma, double n) {
  if (!(n >= 0.0)) throw std::invalid_argument("truncation level must be nonnegative");
  auto pieces = gamma.to_pairs();
  for (auto& p : pieces) p.second = std::min(p.second, n);
  return StepOrderParam(std::move(pieces));
}

DiscreteCDF embed_finite_beta(const StepOrderParam& gamma, double beta) {
  if (!(beta > gamma.sup())) {
    throw std::invalid_argument("embedding needs beta > gamma(1-)");
  }
  std::vector<std::pair<double, double>> atoms;
  double prev = 0.0;
  for (std::size_t j = 0; j < gamma.pieces(); ++j) {
    const double level = gamma.values()[j] / beta;
    atoms.emplace_back(gamma.breaks()[j], level - prev);
    prev = level;
  }
  atoms.emplace_back(1.0, 1.0 - prev);
  return DiscreteCDF(std::move(atoms));
}

double minimizer_envelope(const MixingFunction& m, double s) {
  if (s >= 1.0) return std::numeric_limits<double>::infinity();
  const double denom = m.xi(1.0) - m.xi(std::max(s, 0.0));
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 * m.xi_prime(1.0) * std::numbers::ln2) / denom;
}

}  // namespace parisi
