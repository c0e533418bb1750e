#include "parisi/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "parisi/parallel.hpp"
#include "parisi/rng.hpp"

namespace parisi {
namespace {

double power_count(int n, int p) { return std::pow(static_cast<double>(n), p); }

std::size_t entry_count(int n, int p) {
  std::size_t c = 1;
  for (int i = 0; i < p; ++i) c *= static_cast<std::size_t>(n);
  return c;
}

double term_scale(const Term& t, int n) { return t.c * std::pow(static_cast<double>(n), -0.5 * (t.p - 1)); }

// Counter-based standard normal: entry e of the stream `key`.
double counter_normal(std::uint64_t key, std::uint64_t e) {
  const double u1 = (static_cast<double>(splitmix64(key + 2 * e) >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = (static_cast<double>(splitmix64(key + 2 * e + 1) >> 11) + 0.5) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void fill_tensors(const std::vector<Term>& terms, int n, std::uint64_t seed,
                  std::vector<std::vector<double>>& out) {
  out.resize(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const std::uint64_t key = stream_key(seed, static_cast<std::uint64_t>(terms[k].p));
    auto& t = out[k];
    t.resize(entry_count(n, terms[k].p));
    for (std::size_t e = 0; e < t.size(); ++e) t[e] = counter_normal(key, e);
  }
}

void check_budget(const std::vector<Term>& terms, int n) {
  if (n < 1) throw std::invalid_argument("N must be >= 1");
  double total = 0.0;
  for (const auto& t : terms) total += power_count(n, t.p);
  if (total > kTensorBudget)
    throw std::length_error("coupling tensors need " + std::to_string(total) + " entries, budget is 1e9");
}

// sum over all ordered tuples of g * prod sigma, for one tensor.
double tensor_sum(const std::vector<double>& g, int n, int p, std::span<const std::int8_t> s) {
  if (p == 2) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      const double* gi = g.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) row += gi[j] * s[j];
      acc += s[i] * row;
    }
    return acc;
  }
  // Peel the slowest index and recurse on the remaining (p-1)-tensor slice.
  const std::size_t slice = g.size() / n;
  double acc = 0.0;
  std::vector<double> sub(slice);
  for (int i = 0; i < n; ++i) {
    std::copy_n(g.begin() + static_cast<std::ptrdiff_t>(i * slice), slice, sub.begin());
    acc += s[i] * tensor_sum(sub, n, p - 1, s);
  }
  return acc;
}

double raw_energy(const DisorderSample& d, std::span<const std::int8_t> s) {
  double e = 0.0;
  for (std::size_t k = 0; k < d.terms.size(); ++k)
    e += term_scale(d.terms[k], d.n) * tensor_sum(d.tensors[k], d.n, d.terms[k].p, s);
  double m = 0.0;
  for (int i = 0; i < d.n; ++i) m += s[i];
  return e + d.h * m;
}

struct Enumeration {
  double best = -std::numeric_limits<double>::infinity();
  std::uint64_t best_index = 0;
  double log_sum = 0.0;  // log sum exp(beta (E - best)) over enumerated configurations
};

Spins gray_spins(std::uint64_t k, int n, int free) {
  const std::uint64_t g = k ^ (k >> 1);
  Spins s(n, 1);
  for (int i = 0; i < free; ++i)
    if ((g >> i) & 1U) s[i] = -1;
  return s;
}

// Gray-code walk over the first `free` spins, the rest held at +1.
Enumeration enumerate(const ReducedHamiltonian& r, int free, double beta) {
  const int n = r.n;
  Spins s(n, 1);
  std::vector<double> field(n);
  for (int i = 0; i < n; ++i) {
    double f = r.linear[i];
    for (int j = 0; j < n; ++j) f += r.pair[static_cast<std::size_t>(i) * n + j];
    field[i] = f;
  }
  std::vector<std::vector<int>> incidence(n);
  std::vector<double> mono(r.higher.size());  // c_m * current product
  for (std::size_t m = 0; m < r.higher.size(); ++m) {
    mono[m] = r.higher[m].coeff;
    for (int i : r.higher[m].sites) incidence[i].push_back(static_cast<int>(m));
  }

  double e = r.energy(s);
  Enumeration out;
  out.best = e;
  const bool free_energy = beta > 0.0;
  double sum = 1.0;  // relative to out.best
  const std::uint64_t total = std::uint64_t{1} << free;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int i = std::countr_zero(k);
    const double si = s[i];
    double de = -2.0 * si * field[i];
    for (int m : incidence[i]) {
      de -= 2.0 * mono[m];
      mono[m] = -mono[m];
    }
    e += de;
    const double* row = r.pair.data() + static_cast<std::size_t>(i) * n;
    const double shift = -2.0 * si;
    for (int j = 0; j < n; ++j) field[j] += shift * row[j];
    s[i] = static_cast<std::int8_t>(-s[i]);

    if (e > out.best) {
      if (free_energy) sum = sum * std::exp(beta * (out.best - e)) + 1.0;
      out.best = e;
      out.best_index = k;
    } else if (free_energy) {
      sum += std::exp(beta * (e - out.best));
    }
  }
  out.log_sum = std::log(sum);
  return out;
}

struct Exhaustive {
  GroundState ground;
  double log_sum = 0.0;
  double tracked_best = 0.0;
  double constant = 0.0;
};

Exhaustive exhaustive(const DisorderSample& d, bool use_symmetry, double beta) {
  if (d.n > kMaxEnumeration)
    throw std::length_error("exhaustive enumeration supports N <= " + std::to_string(kMaxEnumeration));
  const ReducedHamiltonian r = reduce(d);
  const bool halve = use_symmetry && r.even && d.n > 1;
  const int free = halve ? d.n - 1 : d.n;
  const Enumeration en = enumerate(r, free, beta);
  Exhaustive out;
  out.ground.sigma = gray_spins(en.best_index, d.n, free);
  out.ground.energy_per_spin = r.energy(out.ground.sigma) / d.n;
  out.log_sum = en.log_sum + (halve ? std::numbers::ln2 : 0.0);
  out.tracked_best = en.best;
  out.constant = r.constant;
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

double DisorderSample::energy(std::span<const std::int8_t> sigma) const {
  if (static_cast<int>(sigma.size()) != n) throw std::invalid_argument("configuration size differs from N");
  return raw_energy(*this, sigma);
}

DisorderSample sample_disorder(const MixingFunction& m, int n, std::uint64_t seed) {
  check_budget(m.coeffs(), n);
  DisorderSample d;
  d.n = n;
  d.h = m.h();
  d.seed = seed;
  d.terms = m.coeffs();
  fill_tensors(d.terms, n, seed, d.tensors);
  return d;
}

DisorderSample make_disorder(const MixingFunction& m, int n, std::vector<std::vector<double>> tensors) {
  check_budget(m.coeffs(), n);
  if (tensors.size() != m.coeffs().size()) throw std::invalid_argument("one tensor per term required");
  for (std::size_t k = 0; k < tensors.size(); ++k)
    if (tensors[k].size() != entry_count(n, m.coeffs()[k].p))
      throw std::invalid_argument("tensor for p=" + std::to_string(m.coeffs()[k].p) + " needs N^p entries");
  DisorderSample d;
  d.n = n;
  d.h = m.h();
  d.terms = m.coeffs();
  d.tensors = std::move(tensors);
  return d;
}

double ReducedHamiltonian::energy(std::span<const std::int8_t> s) const {
  double e = constant;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    const double* ji = pair.data() + static_cast<std::size_t>(i) * n;
    for (int j = i + 1; j < n; ++j) row += ji[j] * s[j];
    e += s[i] * (linear[i] + row);
  }
  for (const auto& m : higher) {
    int sign = 1;
    for (int i : m.sites) sign *= s[i];
    e += sign * m.coeff;
  }
  return e;
}

ReducedHamiltonian reduce(const DisorderSample& d) {
  const int n = d.n;
  ReducedHamiltonian r;
  r.n = n;
  r.linear.assign(n, d.h);
  r.pair.assign(static_cast<std::size_t>(n) * n, 0.0);
  std::map<std::vector<int>, double> mono;
  bool even = d.h == 0.0;
  std::vector<int> idx;
  std::vector<int> odd;
  for (std::size_t k = 0; k < d.terms.size(); ++k) {
    const int p = d.terms[k].p;
    if (p % 2 != 0) even = false;
    const double scale = term_scale(d.terms[k], n);
    const auto& g = d.tensors[k];
    idx.assign(p, 0);
    for (std::size_t e = 0; e < g.size(); ++e) {
      if (e > 0) {
        for (int pos = p - 1; pos >= 0; --pos) {
          if (++idx[pos] < n) break;
          idx[pos] = 0;
        }
      }
      odd = idx;
      std::sort(odd.begin(), odd.end());
      std::vector<int> set;
      for (std::size_t a = 0; a < odd.size();) {
        std::size_t b = a;
        while (b < odd.size() && odd[b] == odd[a]) ++b;
        if ((b - a) % 2 == 1) set.push_back(odd[a]);
        a = b;
      }
      const double v = scale * g[e];
      switch (set.size()) {
        case 0: r.constant += v; break;
        case 1: r.linear[set[0]] += v; break;
        case 2:
          r.pair[static_cast<std::size_t>(set[0]) * n + set[1]] += v;
          r.pair[static_cast<std::size_t>(set[1]) * n + set[0]] += v;
          break;
        default: mono[set] += v;
      }
    }
  }
  for (auto& [sites, c] : mono) r.higher.push_back({sites, c});
  r.even = even;
  return r;
}

GroundState ground_state_exhaustive(const DisorderSample& d, bool use_symmetry) {
  return exhaustive(d, use_symmetry, 0.0).ground;
}

GroundState ground_state_bruteforce(const DisorderSample& d) {
  if (d.n > 20) throw std::length_error("brute-force re-evaluation supports N <= 20");
  GroundState best;
  best.energy_per_spin = -std::numeric_limits<double>::infinity();
  Spins s(d.n);
  const std::uint64_t total = std::uint64_t{1} << d.n;
  for (std::uint64_t k = 0; k < total; ++k) {
    for (int i = 0; i < d.n; ++i) s[i] = ((k >> i) & 1U) ? -1 : 1;
    const double e = raw_energy(d, s) / d.n;
    if (e > best.energy_per_spin) {
      best.energy_per_spin = e;
      best.sigma = s;
    }
  }
  return best;
}

ExhaustiveResult free_energy_exhaustive(const DisorderSample& d, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive and finite");
  if (d.n > kMaxFreeEnergyN)
    throw std::length_error("exhaustive free energy supports N <= " + std::to_string(kMaxFreeEnergyN));
  const Exhaustive ex = exhaustive(d, true, beta);
  ExhaustiveResult out;
  out.ground = ex.ground;
  const double l = ex.ground.energy_per_spin;
  out.free_energy = l + ex.log_sum / (beta * d.n);
  if (!(l <= out.free_energy && out.free_energy <= l + std::numbers::ln2 / beta))
    throw std::logic_error("free energy outside the ground state sandwich");
  return out;
}

AnnealResult ground_state_anneal(const DisorderSample& d, const AnnealSchedule& schedule, std::uint64_t seed) {
  if (schedule.sweeps < 1 || schedule.restarts < 1) throw std::invalid_argument("sweeps and restarts must be >= 1");
  if (!(schedule.beta_start > 0.0) || !(schedule.beta_end >= schedule.beta_start))
    throw std::invalid_argument("anneal schedule needs 0 < beta_start <= beta_end");
  const ReducedHamiltonian r = reduce(d);
  const int n = d.n;
  std::vector<std::vector<int>> incidence(n);
  for (std::size_t m = 0; m < r.higher.size(); ++m)
    for (int i : r.higher[m].sites) incidence[i].push_back(static_cast<int>(m));

  AnnealResult out;
  out.best.energy_per_spin = -std::numeric_limits<double>::infinity();
  double best_e = -std::numeric_limits<double>::infinity();
  const double ratio = schedule.sweeps > 1
                           ? std::pow(schedule.beta_end / schedule.beta_start, 1.0 / (schedule.sweeps - 1))
                           : 1.0;
  for (int rs = 0; rs < schedule.restarts; ++rs) {
    Xoshiro256 rng(stream_key(seed, 0xa11ea1, static_cast<std::uint64_t>(rs)));
    Spins s(n);
    for (auto& v : s) v = (rng() >> 63) ? 1 : -1;
    std::vector<double> field(n);
    for (int i = 0; i < n; ++i) {
      double f = r.linear[i];
      for (int j = 0; j < n; ++j) f += r.pair[static_cast<std::size_t>(i) * n + j] * s[j];
      field[i] = f;
    }
    std::vector<double> mono(r.higher.size());
    for (std::size_t m = 0; m < r.higher.size(); ++m) {
      int sign = 1;
      for (int i : r.higher[m].sites) sign *= s[i];
      mono[m] = sign * r.higher[m].coeff;
    }
    double e = r.energy(s);
    if (e > best_e) {
      best_e = e;
      out.best.sigma = s;
    }
    double beta = schedule.beta_start;
    for (int sweep = 0; sweep < schedule.sweeps; ++sweep, beta *= ratio) {
      for (int i = 0; i < n; ++i) {
        double de = -2.0 * s[i] * field[i];
        for (int m : incidence[i]) de -= 2.0 * mono[m];
        if (de >= 0.0 || rng.uniform() < std::exp(beta * de)) {
          for (int m : incidence[i]) mono[m] = -mono[m];
          const double shift = -2.0 * s[i];
          const double* row = r.pair.data() + static_cast<std::size_t>(i) * n;
          for (int j = 0; j < n; ++j) field[j] += shift * row[j];
          s[i] = static_cast<std::int8_t>(-s[i]);
          e += de;
          if (e > best_e) {
            best_e = e;
            out.best.sigma = s;
          }
        }
      }
    }
    // Re-anchor the tracked value on the exact energy of the best state.
    best_e = r.energy(out.best.sigma);
    out.best_so_far.push_back(best_e / n);
  }
  out.best.energy_per_spin = best_e / n;
  return out;
}

CovarianceReport covariance_check(const MixingFunction& m, int n, int samples, std::uint64_t seed,
                                  std::vector<double> overlaps, int threads) {
  if (n < 1 || n > 12) throw std::invalid_argument("covariance check is meant for 1 <= N <= 12");
  if (samples < 2) throw std::invalid_argument("need at least 2 samples");
  check_budget(m.coeffs(), n);
  // sigma^2 flips the first `flips` spins of the all-plus sigma^1.
  std::vector<int> flips;
  for (double r : overlaps) {
    const double f = n * (1.0 - r) / 2.0;
    const int fi = static_cast<int>(std::lround(f));
    if (std::abs(f - fi) > 1e-9 || fi < 0 || fi > n)
      throw std::invalid_argument("overlap " + std::to_string(r) + " is not reachable at N=" + std::to_string(n));
    flips.push_back(fi);
  }
  const auto& terms = m.coeffs();
  const std::size_t probes = overlaps.size();
  std::vector<double> products(static_cast<std::size_t>(samples) * probes);

  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t smp) {
    std::vector<std::vector<double>> tensors;
    fill_tensors(terms, n, stream_key(seed, 0xc0e, smp), tensors);
    std::vector<double> x2(probes, 0.0);
    double x1 = 0.0;
    std::vector<int> idx;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const int p = terms[k].p;
      const double scale = term_scale(terms[k], n);
      idx.assign(p, 0);
      double plus = 0.0;
      std::vector<double> acc(probes, 0.0);
      const auto& g = tensors[k];
      for (std::size_t e = 0; e < g.size(); ++e) {
        if (e > 0) {
          for (int pos = p - 1; pos >= 0; --pos) {
            if (++idx[pos] < n) break;
            idx[pos] = 0;
          }
        }
        plus += g[e];
        for (std::size_t q = 0; q < probes; ++q) {
          int neg = 0;
          for (int a : idx) neg += a < flips[q];
          acc[q] += (neg % 2 == 0) ? g[e] : -g[e];
        }
      }
      x1 += scale * plus;
      for (std::size_t q = 0; q < probes; ++q) x2[q] += scale * acc[q];
    }
    for (std::size_t q = 0; q < probes; ++q) products[smp * probes + q] = x1 * x2[q] / n;
  });

  CovarianceReport rep;
  rep.n = n;
  rep.samples = samples;
  rep.pass = true;
  for (std::size_t q = 0; q < probes; ++q) {
    std::vector<double> col(samples);
    for (int s = 0; s < samples; ++s) col[s] = products[static_cast<std::size_t>(s) * probes + q];
    CovarianceProbe pr;
    pr.overlap = overlaps[q];
    pr.estimate = mean_of(col);
    pr.std_error = std_error_of(col, pr.estimate);
    // xi as a polynomial, so negative overlaps are allowed.
    for (const auto& t : terms) pr.expected += t.c * t.c * std::pow(overlaps[q], t.p);
    const double dev = std::abs(pr.estimate - pr.expected);
    pr.pass = dev <= 3.0 * pr.std_error;
    rep.max_deviation = std::max(rep.max_deviation, dev);
    rep.pass = rep.pass && pr.pass;
    rep.probes.push_back(pr);
  }
  return rep;
}

OracleResult run_oracle(const MixingFunction& m, int n, int samples, std::uint64_t seed,
                        std::optional<double> beta, int threads) {
  if (samples < 1) throw std::invalid_argument("need at least 1 sample");
  if (n > kMaxEnumeration) throw std::length_error("oracle enumeration supports N <= 28");
  if (beta && n > kMaxFreeEnergyN) throw std::length_error("exhaustive free energy supports N <= 24");
  OracleResult out;
  out.n = n;
  out.samples = samples;
  out.seed = seed;
  out.beta = beta;
  out.rows.resize(samples);
  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t s) {
    OracleRow row;
    row.seed = stream_key(seed, static_cast<std::uint64_t>(n), s);
    row.n = n;
    const DisorderSample d = sample_disorder(m, n, row.seed);
    const Exhaustive ex = exhaustive(d, true, beta.value_or(0.0));
    row.ground = ex.ground.energy_per_spin;
    row.centered = row.ground - ex.constant / n;
    if (beta) row.free_energy = row.ground + ex.log_sum / (*beta * n);
    out.rows[s] = row;
  });
  std::vector<double> g, c;
  for (const auto& r : out.rows) {
    g.push_back(r.ground);
    c.push_back(r.centered);
    if (r.free_energy &&
        !(r.ground <= *r.free_energy && *r.free_energy <= r.ground + std::numbers::ln2 / *beta))
      out.sandwich_ok = false;
  }
  out.mean = mean_of(g);
  out.std_error = std_error_of(g, out.mean);
  out.centered_mean = mean_of(c);
  out.centered_std_error = std_error_of(c, out.centered_mean);
  return out;
}

Extrapolation extrapolate_gse(std::span<const int> ns, std::span<const double> means,
                              std::span<const double> std_errors, double omega) {
  const std::size_t k = ns.size();
  if (means.size() != k || std_errors.size() != k) throw std::invalid_argument("extrapolation inputs differ in length");
  std::vector<int> distinct(ns.begin(), ns.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw std::invalid_argument("extrapolation needs at least 3 distinct N");
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");

  const bool unit = std::any_of(std_errors.begin(), std_errors.end(), [](double s) { return !(s > 0.0); });
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> x(k), w(k);
  for (std::size_t i = 0; i < k; ++i) {
    x[i] = std::pow(static_cast<double>(ns[i]), -omega);
    w[i] = unit ? 1.0 : 1.0 / (std_errors[i] * std_errors[i]);
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * means[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * means[i];
  }
  // Centered normal equations for stability.
  const double xb = sx / sw, yb = sy / sw;
  const double cxx = sxx - sw * xb * xb;
  const double cxy = sxy - sw * xb * yb;
  Extrapolation fit;
  fit.omega = omega;
  fit.b = cxy / cxx;
  fit.a = yb - fit.b * xb;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = means[i] - fit.a - fit.b * x[i];
    chi2 += w[i] * r * r;
  }
  const double dof = static_cast<double>(k) - 2.0;
  fit.chi2_reduced = chi2 / dof;
  const double var_a = 1.0 / sw + xb * xb / cxx;  // (X'WX)^{-1}_{00}
  const double scale = unit ? fit.chi2_reduced : std::max(1.0, fit.chi2_reduced);
  fit.a_error = std::sqrt(var_a * scale);
  fit.degenerate = !unit && fit.chi2_reduced > 3.0;
  return fit;
}

Extrapolation extrapolate_gse(const std::vector<OracleResult>& results, double omega, bool centered) {
  std::vector<int> ns;
  std::vector<double> means, errs;
  for (const auto& r : results) {
    ns.push_back(r.n);
    means.push_back(centered ? r.centered_mean : r.mean);
    errs.push_back(centered ? r.centered_std_error : r.std_error);
  }
  return extrapolate_gse(ns, means, errs, omega);
}

}  // namespace parisi
