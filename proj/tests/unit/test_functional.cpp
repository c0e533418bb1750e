#include <cmath>
#include <stdexcept>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "parisi/functional.hpp"

using namespace parisi;
using Pieces = std::vector<std::pair<double, double>>;

TEST_CASE("correction integral") {
  const auto sk = MixingFunction::sk();
  CHECK(correction_integral(sk, StepOrderParam::constant(1.0)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(correction_integral(sk, StepOrderParam::constant(0.0)) == 0.0);
  const MixingFunction p3({{3, 1.0}});
  CHECK(correction_integral(p3, StepOrderParam::constant(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  const MixingFunction mix({{2, 0.4}, {3, 0.9}, {5, 0.3}});
  const StepOrderParam g(Pieces{{0.0, 0.2}, {0.35, 1.1}, {0.8, 2.4}});
  const double ref = oracle::riemann([&](double t) { return 0.5 * t * mix.xi_second(t) * g(t); }, 0.0, 1.0, 2000000);
  CHECK(std::abs(correction_integral(mix, g) - ref) < 1e-8);
}

TEST_CASE("zero temperature functional") {
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  const auto v0 = parisi_zero_t(sk, StepOrderParam::constant(0.0), g);
  CHECK(std::abs(v0.value - std::sqrt(2.0 / std::numbers::pi)) < 1e-7);
  CHECK(v0.correction == 0.0);
  for (double c : {0.5, 0.8, 1.5}) {
    const auto v = parisi_zero_t(sk, StepOrderParam::constant(c), g);
    CHECK(v.value == doctest::Approx(oracle::log_mgf_abs(c, 0.0, 1.0) - c / 4.0).epsilon(1e-10));
  }
}

TEST_CASE("finite beta functional") {
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  for (double beta : {1.0, 3.0}) {
    const auto v = parisi_finite_beta(sk, DiscreteCDF::dirac(0.0), beta, g);
    CHECK(v.value == doctest::Approx(std::log(2.0) / beta + beta / 4.0).epsilon(1e-9));
    CHECK(v.entropy == doctest::Approx(std::log(2.0) / beta));
  }
  CHECK(parisi_finite_beta(sk, DiscreteCDF::dirac(0.0), 1.0, g).value == doctest::Approx(0.9431472).epsilon(1e-7));
  CHECK_THROWS_AS(parisi_finite_beta_scaled(sk, StepOrderParam::constant(5.0), 2.0, g), std::invalid_argument);
}

TEST_CASE("finite beta embedding converges to the zero-temperature value") {
  const auto sk = MixingFunction::sk();
  const SpaceGrid g = SpaceGrid::defaults(sk);
  const StepOrderParam gamma(Pieces{{0.0, 0.0}, {0.3, 1.0}, {0.7, 3.0}});
  const double p = parisi_zero_t(sk, gamma, g).value;
  double prev = 1e300;
  for (double beta : {4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0}) {
    const double d = std::abs(parisi_finite_beta(sk, embed_finite_beta(gamma, beta), beta, g).value - p);
    CHECK(d <= prev);
    prev = d;
  }
  CHECK(prev < 1e-5);
}
