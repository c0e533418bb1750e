// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "parisi/control.hpp"
#include "parisi/functional.hpp"
#include "parisi/gaussian.hpp"
#include "parisi/optimizer.hpp"
#include "parisi/oracle.hpp"
#include "parisi/parallel.hpp"
#include "parisi/pde.hpp"
#include "parisi/rng.hpp"

using namespace parisi;
using Pieces = std::vector<std::pair<double, double>>;

namespace {

const double kRsBound = std::sqrt(2.0 / std::numbers::pi);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StepOrderParam random_gamma(Xoshiro256& rng, int max_jumps, double max_value) {
  const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(max_jumps + 1));
  std::vector<double> breaks{0.0}, values{max_value * rng.uniform() / (k + 1)};
  for (int i = 0; i < k; ++i) breaks.push_back(0.02 + 0.96 * rng.uniform());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  while (values.size() < breaks.size()) values.push_back(values.back() + max_value * rng.uniform() / (k + 1));
  return StepOrderParam(breaks, values);
}

MixingFunction random_model(Xoshiro256& rng) {
  switch (rng() % 4) {
    case 0: return MixingFunction::sk(2.0 * rng.uniform() - 1.0);
    case 1: return MixingFunction({{3, 1.0}}, 2.0 * rng.uniform() - 1.0);
    case 2: return MixingFunction({{2, 0.6}, {3, 0.4}, {4, 0.3}}, 2.0 * rng.uniform() - 1.0);
    default: return MixingFunction({{2, 0.2 + rng.uniform()}, {4, 0.2 + rng.uniform()}});
  }
}

// Worst violation of |f(x) - f(x')| <= |x - x'| over all node pairs, in O(n).
double lipschitz_excess(const SpaceGrid& g, const std::vector<double>& f) {
  double worst = -1e300, min_up = 1e300, max_dn = -1e300;
  for (int i = 0; i < g.n_x; ++i) {
    const double x = g.node(i);
    const double up = f[i] - x, dn = f[i] + x;
    if (i > 0) worst = std::max({worst, up - min_up, max_dn - dn});
    min_up = std::min(min_up, up);
    max_dn = std::max(max_dn, dn);
  }
  return worst;
}

Outcome closed_form_anchor() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  const double p = parisi_zero_t(sk, StepOrderParam::constant(0.0), g).value;
  const double secs = seconds_since(t0);
  const double pr = parisi_zero_t(sk, StepOrderParam::constant(0.0), g.refined()).value;
  const double err = std::abs(p - kRsBound), refine = std::abs(p - pr);
  return {err <= 1e-7 && refine < 1e-8 && secs < 1.0,
          fmt("P(0)=%.10f |err|=%.1e grid-doubling change=%.1e time=%.3fs", p, err, refine, secs)};
}

Outcome tail_formula() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& m : {MixingFunction::sk(), MixingFunction({{3, 1.0}})}) {
    const SpaceGrid g = SpaceGrid::defaults(m);
    for (double beta : {1.0, 2.0, 8.0}) {
      const auto sol = solve_finite_beta(m, DiscreteCDF::dirac(0.0), beta, g);
      for (const auto& layer : sol.layers()) {
        const double shift = 0.5 * beta * (m.xi_prime(1.0) - m.xi_prime(layer.t));
        for (int i = 0; i < g.n_x; ++i)
          worst = std::max(worst, std::abs(layer.value[i] - (log_cosh(beta * g.node(i)) / beta + shift)));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 5.0, fmt("max-abs error=%.2e over all nodes, 6 cases, time=%.2fs", worst, secs)};
}

Outcome derivative_bound() {
  Xoshiro256 rng(stream_key(2024, 3));
  double dmax = 0.0, lip = -1e300;
  for (int c = 0; c < 20; ++c) {
    const MixingFunction m = random_model(rng);
    const StepOrderParam gamma = random_gamma(rng, 3, 6.0);
    const SpaceGrid g = SpaceGrid::defaults(m);
    const auto sol = solve_zero_t(m, gamma, g);
    for (const auto& layer : sol.layers()) {
      for (double d : layer.deriv) dmax = std::max(dmax, std::abs(d));
      lip = std::max(lip, lipschitz_excess(g, layer.value));
    }
  }
  return {dmax <= 1.0 + 1e-10 && lip <= 1e-10,
          fmt("20 random cases: max|dPsi|=%.15f, worst Lipschitz excess=%.1e", dmax, lip)};
}

Outcome gamma_lipschitz() {
  Xoshiro256 rng(stream_key(2024, 4));
  double worst_ratio = 0.0, worst_excess = -1e300;
  bool ok = true;
  for (int c = 0; c < 50; ++c) {
    const MixingFunction m = random_model(rng);
    const StepOrderParam a = random_gamma(rng, 3, 5.0), b = random_gamma(rng, 3, 5.0);
    const auto r = lipschitz_check(m, a, b, SpaceGrid::defaults(m, 1025), 1e-6);
    ok = ok && !r.violated && r.max_gap <= r.bound + 1e-6;
    worst_excess = std::max(worst_excess, r.max_gap - r.bound);
    if (r.bound > 0) worst_ratio = std::max(worst_ratio, r.max_gap / r.bound);
  }
  return {ok, fmt("50 random pairs: max gap/bound=%.3f, max(gap-bound)=%.2e", worst_ratio, worst_excess)};
}

const std::vector<StepOrderParam>& control_gammas() {
  static const std::vector<StepOrderParam> g{StepOrderParam::constant(1.0),
                                             StepOrderParam(Pieces{{0.0, 0.5}, {0.6, 2.0}})};
  return g;
}
const std::vector<std::pair<double, double>> kControlPoints{{0.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}};

McParams control_mc() {
  McParams mc;
  mc.n_paths = 100000;
  mc.n_steps = 512;
  mc.seed = 1;
  mc.threads = default_threads();
  return mc;
}

Outcome variational() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  bool ok = true;
  double worst_sub = -1e300, worst_opt = 0.0;
  int checks = 0;
  for (const auto& gamma : control_gammas()) {
    for (const auto& [s, x] : kControlPoints) {
      const auto r = verify_variational(sk, gamma, Boundary::kAbs, 0.0, g, s, x, control_mc());
      ok = ok && r.pass;
      for (const auto& c : r.suboptimal) {
        worst_sub = std::max(worst_sub, (c.estimate.mean - r.psi) / c.estimate.std_error);
        ++checks;
      }
      worst_opt = std::max(worst_opt, std::abs(r.optimal.mean - r.psi) /
                                          (3.0 * r.optimal.std_error + r.bias_budget));
    }
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 120.0,
          fmt("%d policy checks, max (F(u)-Psi)/SE=%.2f, max |F(u*)-Psi|/(3SE+budget)=%.2f, time=%.1fs", checks,
              worst_sub, worst_opt, secs)};
}

Outcome duality() {
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  const McParams mc = control_mc();
  bool ok = true;
  double worst = 0.0;
  int n = 0;
  for (const auto& gamma : control_gammas()) {
    for (const auto& [s, x] : kControlPoints) {
      const auto times = control_time_grid(sk, gamma, s, mc.n_steps);
      const std::vector<double> inner(times.begin(), times.end() - 1);
      const auto sol = std::make_shared<const PdeSolution>(solve_zero_t(sk, gamma, g, inner));
      for (const auto& pol : {ControlPolicy::constant(0.0), ControlPolicy::constant(0.5), feedback_policy(sol)}) {
        const auto d = duality_gap(*sol, pol, s, x, mc);
        const double z = std::abs(d.difference.mean) / d.difference.std_error;
        ok = ok && z <= 3.0;
        worst = std::max(worst, z);
        ++n;
      }
    }
  }
  return {ok, fmt("%d (gamma, point, policy) cases, max |right side - Psi|/SE=%.2f", n, worst)};
}

Outcome embedding() {
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  const StepOrderParam gamma(Pieces{{0.0, 0.0}, {0.3, 1.0}, {0.7, 3.0}});
  const double p = parisi_zero_t(sk, gamma, g).value;
  bool mono = true;
  double prev = 1e300, last = 0.0;
  std::string seq;
  for (double beta = 4.0; beta <= 256.0; beta *= 2.0) {
    last = std::abs(parisi_finite_beta(sk, embed_finite_beta(gamma, beta), beta, g).value - p);
    mono = mono && last <= prev;
    prev = last;
    seq += fmt(" %.1e", last);
  }
  return {mono && last < 0.01, "|P_beta - P| for beta=4..256:" + seq};
}

Outcome sandwich() {
  const auto sk = MixingFunction::sk();
  const double beta = 10.0;
  const auto r = run_oracle(sk, 16, 100, stream_key(2024, 8), beta, default_threads());
  int ok = 0;
  double min_gap = 1e300;
  for (const auto& row : r.rows) {
    const double f = *row.free_energy;
    ok += row.ground <= f && f <= row.ground + std::log(2.0) / beta;
    min_gap = std::min(min_gap, row.ground + std::log(2.0) / beta - f);
  }
  return {ok == 100 && r.sandwich_ok, fmt("%d/100 instances satisfy L <= F <= L + log2/beta (min upper slack %.3e)",
                                          ok, min_gap)};
}

Outcome covariance() {
  bool ok = true;
  std::string d;
  for (const auto& [name, m] : {std::pair{"SK", MixingFunction::sk()}, std::pair{"p3", MixingFunction({{3, 1.0}})}}) {
    const auto r = covariance_check(m, 8, 100000, stream_key(2024, 9), {-1.0, -0.5, 0.0, 0.5, 1.0},
                                    default_threads());
    ok = ok && r.pass;
    double worst = 0.0;
    for (const auto& p : r.probes) worst = std::max(worst, std::abs(p.estimate - p.expected) / p.std_error);
    d += fmt("%s max|dev|=%.4f (%.2f SE) ", name, r.max_deviation, worst);
  }
  return {ok, d};
}

OptimizerConfig acceptance_optimizer(const MixingFunction& m) {
  OptimizerConfig cfg;
  cfg.restarts = 4;
  cfg.max_iters = 3000;
  cfg.f_tol = 1e-10;
  cfg.seed = 1;
  cfg.threads = default_threads();
  cfg.search_grid = SpaceGrid::defaults(m, 513);
  return cfg;
}

std::optional<GseReport> sk_report;

const GseReport& sk_optimum() {
  if (!sk_report) {
    const auto sk = MixingFunction::sk();
    sk_report = gse_estimate(sk, 3, acceptance_optimizer(sk), SpaceGrid::defaults(sk));
  }
  return *sk_report;
}

Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sk = MixingFunction::sk();
  const GseReport& opt = sk_optimum();
  std::vector<OracleResult> results;
  std::string means;
  for (int n : {16, 20, 24}) {
    results.push_back(run_oracle(sk, n, 2000, stream_key(2024, 10), std::nullopt, default_threads()));
    means += fmt(" E L_%d=%.4f(%.4f)", n, results.back().centered_mean, results.back().centered_std_error);
  }
  const Extrapolation e = extrapolate_gse(results);
  const double secs = seconds_since(t0);
  const double diff = opt.estimate - e.a;
  const bool ok = std::abs(diff) <= 0.02 && opt.estimate <= kRsBound - 0.02 && secs < 1800.0 && !e.degenerate;
  return {ok, fmt("optimizer %.6f, oracle extrapolation %.4f +- %.4f (chi2/dof %.2f), diff %.4f, below k=0 bound by "
                  "%.4f;%s; time=%.0fs",
                  opt.estimate, e.a, e.a_error, e.chi2_reduced, diff, kRsBound - opt.estimate, means.c_str(), secs)};
}

Outcome nesting() {
  bool ok = true;
  std::string d;
  auto check = [&](const char* name, const GseReport& r, double tol) {
    d += std::string(name) + ":";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      if (i > 0) ok = ok && r.rows[i].value <= r.rows[i - 1].value + tol;
      d += fmt(" %.7f", r.rows[i].value);
    }
    d += " ";
  };
  const auto cfg = acceptance_optimizer(MixingFunction::sk());
  check("SK", sk_optimum(), cfg.f_tol);
  const MixingFunction p3({{3, 1.0}});
  check("p3", gse_estimate(p3, 3, acceptance_optimizer(p3), SpaceGrid::defaults(p3)), cfg.f_tol);
  return {ok, d};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"closed-form anchor", closed_form_anchor},
      {"explicit tail formula", tail_formula},
      {"derivative bound and Lipschitz in x", derivative_bound},
      {"Lipschitz dependence on gamma", gamma_lipschitz},
      {"variational representation", variational},
      {"duality identity", duality},
      {"finite-beta embedding convergence", embedding},
      {"finite-N sandwich", sandwich},
      {"covariance identity", covariance},
      {"end-to-end ground state energy", end_to_end},
      {"nesting monotonicity", nesting},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s | %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
