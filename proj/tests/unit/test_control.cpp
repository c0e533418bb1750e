#include <cmath>
#include <stdexcept>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "parisi/control.hpp"
#include "parisi/rng.hpp"

using namespace parisi;

namespace {

McParams small_mc() {
  McParams mc;
  mc.n_paths = 20000;
  mc.n_steps = 128;
  mc.seed = 5;
  return mc;
}

std::shared_ptr<const PdeSolution> dense(const MixingFunction& m, const StepOrderParam& gamma, double s, int steps) {
  const auto t = control_time_grid(m, gamma, s, steps);
  const std::vector<double> inner(t.begin(), t.end() - 1);
  return std::make_shared<const PdeSolution>(solve_zero_t(m, gamma, SpaceGrid::defaults(m), inner));
}

}  // namespace

TEST_CASE("driftless functional is E|x + a Z|") {
  const auto sk = MixingFunction::sk();
  const auto sol = dense(sk, StepOrderParam::constant(0.0), 0.0, 128);
  const auto f = simulate_functional(*sol, ControlPolicy::constant(0.0), 0.0, 0.0, small_mc());
  CHECK(std::abs(f.mean - std::sqrt(2.0 / std::numbers::pi)) <= 3.0 * f.std_error);
}

TEST_CASE("constant control closed form") {
  const auto sk = MixingFunction::sk();
  const auto sol = dense(sk, StepOrderParam::constant(1.0), 0.0, 128);
  const auto f = simulate_functional(*sol, ControlPolicy::constant(0.5), 0.0, 0.0, small_mc());
  const double ref = oracle::mean_abs(0.5) - 0.125;
  CHECK(ref == doctest::Approx(0.7705931).epsilon(1e-6));
  CHECK(std::abs(f.mean - ref) <= 3.0 * f.std_error);
}

TEST_CASE("start close to the terminal time") {
  const auto sk = MixingFunction::sk();
  const double s = 1.0 - 1e-8;
  const auto sol = dense(sk, StepOrderParam::constant(1.0), s, 16);
  const auto f = simulate_functional(*sol, ControlPolicy::constant(0.3), s, 0.7, small_mc());
  CHECK(std::abs(f.mean - 0.7) < 1e-6);
}

TEST_CASE("zero order parameter makes every policy tie") {
  const auto sk = MixingFunction::sk();
  const auto sol = dense(sk, StepOrderParam::constant(0.0), 0.0, 64);
  McParams mc = small_mc();
  mc.n_steps = 64;
  const double base = simulate_functional(*sol, ControlPolicy::constant(0.0), 0.0, 0.4, mc).mean;
  for (double u : {-1.0, 0.5, 1.0})
    CHECK(simulate_functional(*sol, ControlPolicy::constant(u), 0.0, 0.4, mc).mean == base);
  CHECK(simulate_functional(*sol, feedback_policy(sol), 0.0, 0.4, mc).mean == base);
  const auto d = duality_gap(*sol, ControlPolicy::constant(0.7), 0.0, 0.4, mc);
  CHECK(d.right_side.mean == d.functional.mean);
}

TEST_CASE("feedback policy is bounded and odd") {
  const auto sk = MixingFunction::sk();
  const auto sol = dense(sk, StepOrderParam(std::vector<std::pair<double, double>>{{0.0, 0.5}, {0.6, 2.0}}), 0.0, 64);
  const auto u = feedback_policy(sol);
  Xoshiro256 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) worst = std::max(worst, std::abs(u(rng.uniform(), 20.0 * (rng.uniform() - 0.5))));
  CHECK(worst <= 1.0);
  for (double t : {0.0, 0.3, 0.61, 0.95}) CHECK(std::abs(u(t, 0.0)) < 1e-14);
  CHECK(u(1.0, 3.0) == 0.0);
}

TEST_CASE("policy validation and step-size guard") {
  CHECK_THROWS_AS(ControlPolicy::constant(1.5), std::invalid_argument);
  const auto sk = MixingFunction::sk();
  const auto sol = dense(sk, StepOrderParam::constant(50.0), 0.0, 16);
  McParams mc = small_mc();
  mc.n_steps = 16;
  CHECK_THROWS_AS(simulate_functional(*sol, ControlPolicy::constant(0.0), 0.0, 0.0, mc), std::invalid_argument);
}

TEST_CASE("duality identity and suboptimality gap") {
  const auto sk = MixingFunction::sk();
  const StepOrderParam gamma = StepOrderParam::constant(2.0);
  const auto sol = dense(sk, gamma, 0.0, 128);
  const McParams mc = small_mc();
  for (const auto& pol : {ControlPolicy::constant(0.0), ControlPolicy::constant(1.0), feedback_policy(sol)}) {
    const auto d = duality_gap(*sol, pol, 0.0, 2.0, mc);
    CHECK(std::abs(d.difference.mean) <= 3.0 * d.difference.std_error + 2e-3);
  }
  // u* is switched off on the final step, so its gap is O(step) only.
  const auto opt = duality_gap(*sol, feedback_policy(sol), 0.0, 2.0, mc);
  McParams fine_mc = mc;
  fine_mc.n_steps = 256;
  const auto sol_fine = dense(sk, gamma, 0.0, 256);
  const auto opt_fine = duality_gap(*sol_fine, feedback_policy(sol_fine), 0.0, 2.0, fine_mc);
  const double ratio = opt_fine.gap.mean / opt.gap.mean;
  CHECK(ratio > 0.4);
  CHECK(ratio < 0.6);
  const auto zero = duality_gap(*sol, ControlPolicy::constant(0.0), 0.0, 2.0, mc);
  CHECK(zero.gap.mean > opt.gap.mean + 3.0 * (zero.gap.std_error + opt.gap.std_error));
}

TEST_CASE("simulation is reproducible and thread-count independent") {
  const auto sk = MixingFunction::sk();
  const auto sol = dense(sk, StepOrderParam::constant(1.0), 0.0, 64);
  McParams mc = small_mc();
  mc.n_steps = 64;
  const auto a = simulate_functional(*sol, feedback_policy(sol), 0.0, 0.3, mc);
  mc.threads = 3;
  const auto b = simulate_functional(*sol, feedback_policy(sol), 0.0, 0.3, mc);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("variational check at reduced size") {
  const auto sk = MixingFunction::sk();
  McParams mc = small_mc();
  const auto r = verify_variational(sk, StepOrderParam::constant(1.0), Boundary::kAbs, 0.0, SpaceGrid::defaults(sk),
                                    0.0, 0.5, mc);
  CHECK(r.pass);
  CHECK(r.suboptimal.size() == 6);
}
