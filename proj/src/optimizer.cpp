#include "parisi/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "parisi/parallel.hpp"
#include "parisi/rng.hpp"

namespace parisi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Objective = std::function<FunctionalValue(const StepOrderParam&, const SpaceGrid&)>;

// One simplex run until the spread of function values drops below f_tol.
void simplex_core(const std::function<double(const std::vector<double>&)>& f,
                  std::vector<std::vector<double>>& pts, std::vector<double>& vals, int& evals,
                  int max_evals, double f_tol, bool& converged) {
  const std::size_t n = pts.size() - 1;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };
  std::vector<std::size_t> order(n + 1);
  converged = false;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (vals[worst] - vals[best] <= f_tol) {
      converged = true;
      return;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / n;
    }
    auto along = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d) x[d] = centroid[d] + coef * (pts[worst][d] - centroid[d]);
      return x;
    };
    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = std::move(xe);
        vals[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = std::move(xr);
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = std::move(xc);
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
      vals[i] = eval(pts[i]);
    }
  }
}

StepOrderParam build_alpha_pieces(const std::vector<double>& breaks, const std::vector<double>& values) {
  std::vector<std::pair<double, double>> pieces;
  for (std::size_t j = 0; j < breaks.size(); ++j) {
    const double t = breaks[j];
    if (t >= 1.0 - 1e-12) break;
    if (!pieces.empty() && t <= pieces.back().first) {
      pieces.back().second = values[j];
      continue;
    }
    pieces.emplace_back(t, values[j]);
  }
  return StepOrderParam(std::move(pieces));
}

// Split the last piece at a fraction of its width and raise the new tail.
StepOrderParam insert_tail_break(const StepOrderParam& gamma, double frac, double factor) {
  std::vector<double> lo = gamma.breaks();
  std::vector<double> val = gamma.values();
  lo.push_back(lo.back() + frac * (1.0 - lo.back()));
  val.push_back(val.back() * factor);
  return build_alpha_pieces(lo, val);
}

struct Candidate {
  std::vector<double> x;
  double value = kInf;
  int evaluations = 0;
  bool converged = false;
};

OptimizationResult run_search(const Objective& objective, const StepParameterization& param,
                              const OptimizerConfig& cfg, const SpaceGrid& g,
                              const std::optional<StepOrderParam>& warm_start, double init_scale) {
  if (cfg.k < 0) throw std::invalid_argument("k must be >= 0");
  if (!(cfg.f_tol > 0.0)) throw std::invalid_argument("f_tol must be positive");
  if (cfg.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  const SpaceGrid search = cfg.search_grid.value_or(g);
  const int dim = param.dimension();

  auto f = [&](const std::vector<double>& x) {
    try {
      return objective(param.decode(x), search).value;
    } catch (const GridTooSmall&) {
      return kInf;
    }
  };

  static constexpr std::array<double, 3> kTailFracs{0.5, 0.8, 0.95};
  const bool can_insert = warm_start && static_cast<int>(warm_start->jumps()) < param.jumps();

  std::vector<Candidate> results(cfg.restarts);
  parallel_for(results.size(), cfg.threads, [&](std::size_t r) {
    std::vector<double> x0;
    if (r == 0 && warm_start) {
      x0 = param.encode(*warm_start);
    } else if (can_insert && r <= kTailFracs.size()) {
      x0 = param.encode(insert_tail_break(*warm_start, kTailFracs[r - 1], 1.4));
    } else {
      Xoshiro256 rng(stream_key(cfg.seed, static_cast<std::uint64_t>(cfg.k), r));
      x0.assign(dim, 0.0);
      const int k = param.jumps();
      std::vector<double> gaps(k + 1);
      for (auto& gap : gaps) gap = r == 0 ? 1.0 : -std::log(rng.uniform());
      for (int i = 0; i < k; ++i) x0[i] = std::log(gaps[i] / gaps[k]);
      for (int j = 0; j <= k; ++j) {
        const double inc = r == 0 ? init_scale / (k + 1) : init_scale * -std::log(rng.uniform()) / (k + 1);
        x0[k + j] = std::sqrt(inc);
      }
    }
    Candidate c;
    const SimplexResult s = nelder_mead(f, x0, 0.5, cfg.max_iters, cfg.f_tol);
    c.x = s.x;
    c.value = s.value;
    c.evaluations = s.evaluations;
    c.converged = s.converged;
    results[r] = std::move(c);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    const double diff = results[r].value - results[best].value;
    if (diff < -cfg.f_tol) {
      best = r;
    } else if (std::abs(diff) <= cfg.f_tol &&
               param.decode(results[r].x).pieces() < param.decode(results[best].x).pieces()) {
      best = r;
    }
  }

  OptimizationResult out;
  out.gamma = param.decode(results[best].x);
  out.detail = objective(out.gamma, g);
  out.value = out.detail.value;
  out.converged = results[best].converged;
  for (std::size_t r = 0; r < results.size(); ++r) {
    out.trace.push_back({static_cast<int>(r), results[r].value, results[r].evaluations, results[r].converged});
  }
  return out;
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step, int max_evals, double f_tol) {
  SimplexResult out;
  const std::size_t n = x0.size();
  if (n == 0) {
    out.x = x0;
    out.value = f(x0);
    out.evaluations = 1;
    out.converged = true;
    return out;
  }
  int evals = 0;
  auto safe = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };
  std::vector<double> best_x = x0;
  double best_v = safe(x0);
  // Re-seed the simplex around the incumbent until a full run no longer
  // improves it by more than f_tol.
  for (double s = step; evals < max_evals; s = std::max(s * 0.3, 1e-4)) {
    std::vector<std::vector<double>> pts(n + 1, best_x);
    std::vector<double> vals(n + 1, best_v);
    for (std::size_t i = 0; i < n && evals < max_evals; ++i) {
      pts[i + 1][i] += s;
      vals[i + 1] = safe(pts[i + 1]);
    }
    bool converged = false;
    simplex_core(f, pts, vals, evals, max_evals, f_tol, converged);
    const auto it = std::min_element(vals.begin(), vals.end());
    const double improvement = best_v - *it;
    if (*it < best_v) {
      best_v = *it;
      best_x = pts[static_cast<std::size_t>(it - vals.begin())];
    }
    if (converged && improvement <= f_tol) {
      out.converged = true;
      break;
    }
  }
  out.x = std::move(best_x);
  out.value = best_v;
  out.evaluations = evals;
  return out;
}

StepParameterization::StepParameterization(int k, std::function<double(double)> cap)
    : k_(k), cap_(std::move(cap)) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
}

StepOrderParam StepParameterization::decode(const std::vector<double>& x) const {
  const int k = k_;
  std::vector<double> gaps(k + 1, 1.0);
  for (int i = 0; i < k; ++i) gaps[i] = std::exp(std::clamp(x[i], -60.0, 60.0));
  const double total = std::accumulate(gaps.begin(), gaps.end(), 0.0);
  std::vector<double> breaks(k + 1, 0.0);
  for (int j = 1; j <= k; ++j) breaks[j] = breaks[j - 1] + gaps[j - 1] / total;
  std::vector<double> values(k + 1);
  double acc = 0.0;
  for (int j = 0; j <= k; ++j) {
    acc += x[k + j] * x[k + j];
    values[j] = std::min(acc, cap_(breaks[j]));
  }
  return build_alpha_pieces(breaks, values);
}

std::vector<double> StepParameterization::encode(const StepOrderParam& gamma) const {
  if (static_cast<int>(gamma.jumps()) > k_) {
    throw std::invalid_argument("warm start has more jumps than the parameterization");
  }
  std::vector<double> lo = gamma.breaks();
  std::vector<double> val = gamma.values();
  while (static_cast<int>(lo.size()) < k_ + 1) {
    std::size_t widest = 0;
    double wmax = -1.0;
    for (std::size_t j = 0; j < lo.size(); ++j) {
      const double hi = j + 1 < lo.size() ? lo[j + 1] : 1.0;
      if (hi - lo[j] > wmax) {
        wmax = hi - lo[j];
        widest = j;
      }
    }
    lo.insert(lo.begin() + widest + 1, lo[widest] + 0.5 * wmax);
    val.insert(val.begin() + widest + 1, val[widest]);
  }
  std::vector<double> x(dimension(), 0.0);
  const double last = 1.0 - lo.back();
  for (int i = 0; i < k_; ++i) x[i] = std::log((lo[i + 1] - lo[i]) / last);
  double prev = 0.0;
  for (int j = 0; j <= k_; ++j) {
    x[k_ + j] = std::sqrt(std::max(0.0, val[j] - prev));
    prev = val[j];
  }
  return x;
}

std::function<double(double)> zero_t_cap(const MixingFunction& m, const OptimizerConfig& cfg) {
  const double global = cfg.global_cap;
  if (!cfg.envelope_cap) return [global](double) { return global; };
  return [m, global](double s) { return std::min(global, minimizer_envelope(m, s)); };
}

OptimizationResult minimize_zero_t(const MixingFunction& m, const OptimizerConfig& cfg,
                                   const SpaceGrid& g, const std::optional<StepOrderParam>& warm_start) {
  const StepParameterization param(cfg.k, zero_t_cap(m, cfg));
  const Objective obj = [&m](const StepOrderParam& gamma, const SpaceGrid& grid) {
    return parisi_zero_t(m, gamma, grid);
  };
  return run_search(obj, param, cfg, g, warm_start, 1.0);
}

OptimizationResult minimize_finite_beta(const MixingFunction& m, double beta,
                                        const OptimizerConfig& cfg, const SpaceGrid& g,
                                        const std::optional<StepOrderParam>& warm_start) {
  if (!(beta > 0.0)) throw std::invalid_argument("inverse temperature must be positive");
  const StepParameterization param(cfg.k, [beta](double) { return beta; });
  const Objective obj = [&m, beta](const StepOrderParam& eta, const SpaceGrid& grid) {
    return parisi_finite_beta_scaled(m, eta, beta, grid);
  };
  OptimizationResult out = run_search(obj, param, cfg, g, warm_start, std::min(beta, 1.0));
  out.beta = beta;

  std::vector<std::pair<double, double>> atoms;
  double prev = 0.0;
  out.q_max = 1.0;
  for (std::size_t j = 0; j < out.gamma.pieces(); ++j) {
    const double level = std::min(out.gamma.values()[j] / beta, 1.0);
    atoms.emplace_back(out.gamma.breaks()[j], level - prev);
    prev = level;
    if (level >= 1.0 && out.q_max == 1.0) out.q_max = out.gamma.breaks()[j];
    out.envelope_excess = std::max(out.envelope_excess,
                                   out.gamma.values()[j] - minimizer_envelope(m, out.gamma.breaks()[j]));
  }
  atoms.emplace_back(1.0, 1.0 - prev);
  out.alpha = DiscreteCDF(std::move(atoms));
  return out;
}

GseReport gse_estimate(const MixingFunction& m, int k_max, const OptimizerConfig& cfg,
                       const SpaceGrid& g) {
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  GseReport rep;
  std::optional<StepOrderParam> warm;
  for (int k = 0; k <= k_max; ++k) {
    OptimizerConfig c = cfg;
    c.k = k;
    const auto res = minimize_zero_t(m, c, g, warm);
    GseRow row{k, res.value, res.gamma, res.converged};
    // Nesting: the k-jump family contains every (k-1)-jump candidate.
    if (!rep.rows.empty() && row.value > rep.rows.back().value) {
      row.value = rep.rows.back().value;
      row.gamma = rep.rows.back().gamma;
    }
    warm = row.gamma;
    rep.rows.push_back(row);
  }
  const GseRow& last = rep.rows.back();
  rep.estimate = last.value;
  rep.extrapolated = last.value;
  if (rep.rows.size() >= 3) {
    const double d1 = rep.rows[rep.rows.size() - 2].value - last.value;
    const double d0 = rep.rows[rep.rows.size() - 3].value - rep.rows[rep.rows.size() - 2].value;
    if (d0 > 0.0 && d1 >= 0.0 && d1 < d0) {
      const double r = d1 / d0;
      rep.extrapolated = last.value - d1 * r / (1.0 - r);
    }
    rep.plateau = d1 <= 10.0 * cfg.f_tol;
  }
  rep.grid_error = std::abs(parisi_zero_t(m, last.gamma, g.refined()).value - last.value);
  rep.error_bar = rep.grid_error + (rep.estimate - rep.extrapolated);
  return rep;
}

}  // namespace parisi
