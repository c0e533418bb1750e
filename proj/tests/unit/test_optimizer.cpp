#include <cmath>
#include <stdexcept>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "parisi/optimizer.hpp"

using namespace parisi;

namespace {

OptimizerConfig quick(int k) {
  OptimizerConfig cfg;
  cfg.k = k;
  cfg.restarts = 2;
  cfg.max_iters = 1500;
  return cfg;
}

}  // namespace

TEST_CASE("Nelder-Mead on a shifted quadratic") {
  auto f = [](const std::vector<double>& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + 4.0 * (x[1] + 2.0) * (x[1] + 2.0) + 0.5 * x[0] * x[1];
  };
  const auto r = nelder_mead(f, {0.0, 0.0}, 0.5, 4000, 1e-14);
  // Gradient vanishes at the minimizer.
  CHECK(r.converged);
  CHECK(std::abs(2.0 * (r.x[0] - 1.0) + 0.5 * r.x[1]) < 1e-5);
  CHECK(std::abs(8.0 * (r.x[1] + 2.0) + 0.5 * r.x[0]) < 1e-5);
}

TEST_CASE("parameterization always decodes to a valid order parameter") {
  const auto sk = MixingFunction::sk();
  const StepParameterization par(3, zero_t_cap(sk, OptimizerConfig{}));
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(par.dimension());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::sin(1.7 * trial + 2.3 * i) * (1 + trial % 7);
    const StepOrderParam g = par.decode(p);
    CHECK(g.jumps() <= 3);
    for (std::size_t j = 0; j < g.pieces(); ++j) {
      CHECK(g.values()[j] >= 0.0);
      CHECK(g.values()[j] <= std::min(minimizer_envelope(sk, g.breaks()[j]), 50.0) + 1e-9);
    }
  }
  const StepOrderParam g(std::vector<std::pair<double, double>>{{0.0, 0.3}, {0.4, 1.0}, {0.8, 2.0}});
  const StepOrderParam back = par.decode(par.encode(g));
  CHECK(l1_distance(g, back) < 1e-9);
}

TEST_CASE("k = 0 optimum matches a golden-section oracle") {
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  const double cap = minimizer_envelope(sk, 0.0);
  double fmin = 0.0;
  const double c = oracle::golden_min([](double c) { return oracle::log_mgf_abs(c, 0.0, 1.0) - c / 4.0; }, 1e-9,
                                      cap, 1e-10, &fmin);
  const auto r = minimize_zero_t(sk, quick(0), g);
  CHECK(r.value == doctest::Approx(fmin).epsilon(1e-6));
  CHECK(std::abs(r.gamma.sup() - c) < 1e-3);
  CHECK(r.value < std::sqrt(2.0 / std::numbers::pi));
}

TEST_CASE("vanishing cap degenerates to gamma = 0") {
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  OptimizerConfig cfg = quick(0);
  cfg.global_cap = 1e-12;
  const auto r = minimize_zero_t(sk, cfg, g);
  CHECK(r.value == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-9));
}

TEST_CASE("optima are nonincreasing in k and deterministic") {
  const MixingFunction p3({{3, 1.0}});
  const SpaceGrid g = SpaceGrid::defaults(p3);
  OptimizerConfig cfg = quick(0);
  cfg.search_grid = SpaceGrid::defaults(p3, 513);
  const auto a = gse_estimate(p3, 2, cfg, g);
  REQUIRE(a.rows.size() == 3);
  for (std::size_t i = 1; i < a.rows.size(); ++i) CHECK(a.rows[i].value <= a.rows[i - 1].value + cfg.f_tol);
  const auto b = gse_estimate(p3, 2, cfg, g);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].value == b.rows[i].value);
    CHECK(a.rows[i].gamma == b.rows[i].gamma);
  }
  CHECK(a.estimate <= a.rows.front().value);
}

TEST_CASE("strong field is close to replica symmetric") {
  const auto m = MixingFunction::sk(5.0);
  const SpaceGrid g = SpaceGrid::defaults(m);
  OptimizerConfig cfg = quick(0);
  cfg.search_grid = SpaceGrid::defaults(m, 513);
  const auto r = gse_estimate(m, 1, cfg, g);
  CHECK(std::abs(r.rows[1].value - r.rows[0].value) < 1e-3);
}

TEST_CASE("finite beta at high temperature") {
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  const double beta = 0.5;
  const auto r = minimize_finite_beta(sk, beta, quick(0), g);
  CHECK(r.value == doctest::Approx(std::log(2.0) / beta + beta / 4.0).epsilon(1e-7));
  REQUIRE(r.alpha.has_value());
  CHECK(r.envelope_excess <= 1e-9);
}
