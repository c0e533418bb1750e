#pragma once

#include <vector>

namespace parisi {

double normal_pdf(double z);
double normal_cdf(double z);
// log Phi(z), accurate far into the lower tail.
double log_normal_cdf(double z);
// E|x + sigma Z| for standard Gaussian Z.
double mean_abs_gaussian(double x, double sigma);

// log(cosh(y)) without overflow.
double log_cosh(double y);

// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

}  // namespace parisi
