#include "parisi/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "parisi/gaussian.hpp"

namespace parisi {
namespace {

// Half-width of every Gaussian window, in standard deviations.
constexpr double kTail = 10.0;
// Below this coefficient the Cole-Hopf logarithm is replaced by its
// second-order moment expansion to avoid cancellation.
constexpr double kSmallEta = 1e-7;
// Tilted probe mass allowed beyond the extension margin.
constexpr double kProbeMass = 1e-12;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Normalized log-weights of a discrete Gaussian kernel on the grid spacing.
struct Kernel {
  int half = 0;
  std::vector<double> logw;  // index m + half
  std::vector<double> w;
};

Kernel make_kernel(double sigma, double v, double dx) {
  Kernel k;
  const double reach = kTail * sigma + v * sigma * sigma;
  if (sigma >= 1.5 * dx) {
    // Sampled density; the trapezoid sum of a Gaussian-smoothed integrand
    // converges spectrally in sigma / dx.
    k.half = static_cast<int>(std::ceil(reach / dx));
    k.logw.resize(2 * k.half + 1);
    for (int m = -k.half; m <= k.half; ++m) {
      const double z = m * dx / sigma;
      k.logw[m + k.half] = -0.5 * z * z;
    }
  } else {
    // Narrow kernel: exact Gaussian average of the piecewise-linear
    // interpolant, w_m = G(m+1) - 2 G(m) + G(m-1), G(a) = a Phi(a/s) + s phi(a/s).
    const double s = sigma / dx;
    k.half = static_cast<int>(std::ceil(reach / dx)) + 1;
    auto G = [s](double a) { return a * normal_cdf(a / s) + s * normal_pdf(a / s); };
    k.logw.resize(2 * k.half + 1);
    for (int m = -k.half; m <= k.half; ++m) {
      const double w = G(m + 1.0) - 2.0 * G(m) + G(m - 1.0);
      k.logw[m + k.half] = w > 0.0 ? std::log(w) : kNegInf;
    }
  }
  double lse = kNegInf;
  for (double lw : k.logw) lse = log_add_exp(lse, lw);
  k.w.resize(k.logw.size());
  for (std::size_t i = 0; i < k.logw.size(); ++i) {
    k.logw[i] -= lse;
    k.w[i] = std::exp(k.logw[i]);
  }
  return k;
}

struct Context {
  const MixingFunction& model;
  const StepOrderParam& eta;
  Boundary kind;
  double beta;
  const SpaceGrid& grid;
  QuadratureRule rule;
};

// Terminal slab in closed form: Y ~ N(x, sigma^2),
// E exp(v|Y|) = e^{v^2 sigma^2 / 2} (e^{vx} Phi(x/sigma + v sigma) + e^{-vx} Phi(-x/sigma + v sigma)).
PsiValue abs_step(double v, double sigma, double x) {
  if (sigma <= 0.0) return terminal_value(Boundary::kAbs, 0.0, x);
  const double sign_mean = std::erf(x / (sigma * std::numbers::sqrt2));
  const double m1 = mean_abs_gaussian(x, sigma);
  if (v < kSmallEta) {
    const double var = x * x + sigma * sigma - m1 * m1;
    return {m1 + 0.5 * v * var, sign_mean + v * (x - m1 * sign_mean)};
  }
  const double la = v * x + log_normal_cdf(x / sigma + v * sigma);
  const double lb = -v * x + log_normal_cdf(-x / sigma + v * sigma);
  return {0.5 * v * sigma * sigma + log_add_exp(la, lb) / v, std::tanh(0.5 * (la - lb))};
}

// Terminal slab for log cosh(beta y) / beta by panelled Gauss-Legendre in
// z = (y - x) / sigma. Panels are refined on the 1/beta layer around y = 0.
PsiValue logcosh_step(const Context& ctx, double v, double sigma, double x,
                      std::vector<double>& expo, std::vector<double>& fval,
                      std::vector<double>& dval) {
  const double beta = ctx.beta;
  if (sigma <= 0.0) return terminal_value(Boundary::kLogCosh, beta, x);
  const double lo = -kTail - v * sigma;
  const double hi = kTail + v * sigma;
  const double z0 = -x / sigma;
  const double band = 20.0 / (beta * sigma);
  const double fine = std::min(0.25, 0.5 / (beta * sigma));

  std::vector<double> cuts{lo, hi};
  for (double c : {z0 - band, z0, z0 + band}) {
    if (c > lo && c < hi) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());

  expo.clear();
  fval.clear();
  dval.clear();
  const auto& rule = ctx.rule;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    const bool in_band = 0.5 * (a + b) > z0 - band && 0.5 * (a + b) < z0 + band;
    const double limit = in_band ? fine : 0.25;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / limit)));
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * width;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double z = mid + 0.5 * width * rule.nodes[q];
        const double y = x + sigma * z;
        expo.push_back(std::log(0.5 * width * rule.weights[q]) + log_norm - 0.5 * z * z);
        fval.push_back(log_cosh(beta * y) / beta);
        dval.push_back(std::tanh(beta * y));
      }
    }
  }

  if (v < kSmallEta) {
    double mass = 0.0, m1 = 0.0, m2 = 0.0, d1 = 0.0, fd = 0.0;
    for (std::size_t i = 0; i < expo.size(); ++i) {
      const double w = std::exp(expo[i]);
      mass += w;
      m1 += w * fval[i];
      m2 += w * fval[i] * fval[i];
      d1 += w * dval[i];
      fd += w * fval[i] * dval[i];
    }
    m1 /= mass;
    m2 /= mass;
    d1 /= mass;
    fd /= mass;
    return {m1 + 0.5 * v * (m2 - m1 * m1), d1 + v * (fd - m1 * d1)};
  }
  double mx = kNegInf;
  for (std::size_t i = 0; i < expo.size(); ++i) {
    expo[i] += v * fval[i];
    mx = std::max(mx, expo[i]);
  }
  double s = 0.0, sd = 0.0;
  for (std::size_t i = 0; i < expo.size(); ++i) {
    const double w = std::exp(expo[i] - mx);
    s += w;
    sd += w * dval[i];
  }
  return {(mx + std::log(s)) / v, std::clamp(sd / s, -1.0, 1.0)};
}

// Advances `next` (time t1) back to `out` (time t0) on the listed nodes, all
// with x >= 0. `next == nullptr` means t1 = 1 (the terminal condition).
void advance(const Context& ctx, const Layer* next, double t0, double t1, Layer& out,
             const std::vector<int>& nodes) {
  const auto& g = ctx.grid;
  const double v = ctx.eta(t0);
  const double sigma = std::sqrt(std::max(0.0, ctx.model.xi_prime(t1) - ctx.model.xi_prime(t0)));
  const int n_x = g.n_x;
  const double dx = g.dx();

  if (next == nullptr) {
    std::vector<double> expo, fval, dval;
    for (int n : nodes) {
      const double x = g.node(n);
      const PsiValue r = ctx.kind == Boundary::kAbs ? abs_step(v, sigma, x)
                                                   : logcosh_step(ctx, v, sigma, x, expo, fval, dval);
      out.value[n] = r.value;
      out.deriv[n] = r.deriv;
    }
    return;
  }

  if (sigma <= 0.0) {
    for (int n : nodes) {
      out.value[n] = next->value[n];
      out.deriv[n] = next->deriv[n];
    }
    return;
  }

  const Kernel k = make_kernel(sigma, v, dx);
  const int half = k.half;
  // Grid values continued with slope +-1 beyond +-x_max.
  std::vector<double> ev(n_x + 2 * half), ed(n_x + 2 * half);
  for (int e = 0; e < n_x + 2 * half; ++e) {
    const int n = e - half;
    if (n < 0) {
      ev[e] = next->value[0] + (-n) * dx;
      ed[e] = -1.0;
    } else if (n >= n_x) {
      ev[e] = next->value[n_x - 1] + (n - (n_x - 1)) * dx;
      ed[e] = 1.0;
    } else {
      ev[e] = next->value[n];
      ed[e] = next->deriv[n];
    }
  }

  const int width = 2 * half + 1;
  for (int n : nodes) {
    const double* val = ev.data() + n;
    const double* der = ed.data() + n;
    if (v < kSmallEta) {
      const double ref = next->value[n];
      double m1 = 0.0, m2 = 0.0, d1 = 0.0, fd = 0.0;
      for (int j = 0; j < width; ++j) {
        const double c = val[j] - ref;
        m1 += k.w[j] * c;
        m2 += k.w[j] * c * c;
        d1 += k.w[j] * der[j];
        fd += k.w[j] * c * der[j];
      }
      out.value[n] = ref + m1 + 0.5 * v * (m2 - m1 * m1);
      out.deriv[n] = std::clamp(d1 + v * (fd - m1 * d1), -1.0, 1.0);
      continue;
    }
    double mx = kNegInf;
    for (int j = 0; j < width; ++j) mx = std::max(mx, k.logw[j] + v * val[j]);
    double s = 0.0, sd = 0.0;
    for (int j = 0; j < width; ++j) {
      const double w = std::exp(k.logw[j] + v * val[j] - mx);
      s += w;
      sd += w * der[j];
    }
    out.value[n] = (mx + std::log(s)) / v;
    out.deriv[n] = std::clamp(sd / s, -1.0, 1.0);
  }

  // Probes past x_max + margin must carry negligible tilted mass at the
  // outermost node.
  const int limit = static_cast<int>(std::floor(g.extension_margin / dx));
  if (half > limit) {
    const int n = n_x - 1;
    const double* val = ev.data() + n;
    double mx = kNegInf;
    for (int j = 0; j < width; ++j) mx = std::max(mx, k.logw[j] + v * val[j]);
    double total = 0.0, outside = 0.0;
    for (int j = 0; j < width; ++j) {
      const double w = std::exp(k.logw[j] + v * val[j] - mx);
      total += w;
      if (j - half > limit) outside += w;
    }
    if (outside > kProbeMass * total) {
      throw GridTooSmall("quadrature reaches beyond x_max + extension margin (x_max=" +
                         std::to_string(g.x_max) + ", margin=" + std::to_string(g.extension_margin) +
                         ")");
    }
  }
}

void mirror(Layer& layer, const SpaceGrid& g, const std::vector<int>& nodes) {
  const int c = g.center();
  for (int n : nodes) {
    const int m = 2 * c - n;
    layer.value[m] = layer.value[n];
    layer.deriv[m] = -layer.deriv[n];
  }
  layer.deriv[c] = 0.0;
}

std::vector<double> layer_times(const StepOrderParam& eta, std::span<const double> extra) {
  std::vector<double> times(eta.breaks().begin(), eta.breaks().end());
  for (double t : extra) {
    if (!(t >= 0.0 && t < 1.0)) {
      throw std::invalid_argument("extra layer time must lie in [0,1)");
    }
    times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  times.push_back(1.0);
  return times;
}

std::vector<int> half_nodes(const SpaceGrid& g) {
  std::vector<int> nodes;
  for (int n = g.center(); n < g.n_x; ++n) nodes.push_back(n);
  return nodes;
}

Layer terminal_layer(const SpaceGrid& g, Boundary kind, double beta) {
  Layer layer{1.0, std::vector<double>(g.n_x), std::vector<double>(g.n_x)};
  for (int n = 0; n < g.n_x; ++n) {
    const PsiValue r = terminal_value(kind, beta, g.node(n));
    layer.value[n] = r.value;
    layer.deriv[n] = r.deriv;
  }
  layer.deriv[g.center()] = 0.0;
  return layer;
}

void check_inputs(const MixingFunction& m, Boundary kind, double beta, const SpaceGrid& g) {
  g.validate(m);
  if (kind == Boundary::kLogCosh && !(beta > 0.0 && std::isfinite(beta))) {
    throw std::invalid_argument("inverse temperature must be positive and finite");
  }
}

// Fritsch-Butland slope of the derivative data at node i.
double pchip_slope(const std::vector<double>& d, int i, double dx) {
  const int n = static_cast<int>(d.size());
  if (i <= 0) return (d[1] - d[0]) / dx;
  if (i >= n - 1) return (d[n - 1] - d[n - 2]) / dx;
  const double a = (d[i] - d[i - 1]) / dx;
  const double b = (d[i + 1] - d[i]) / dx;
  if (a * b <= 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

}  // namespace

PsiValue terminal_value(Boundary kind, double beta, double x) {
  if (kind == Boundary::kAbs) return {std::abs(x), x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0)};
  return {log_cosh(beta * x) / beta, std::tanh(beta * x)};
}

SpaceGrid SpaceGrid::defaults(const MixingFunction& m, int n_x) {
  SpaceGrid g;
  const double scale = std::sqrt(m.xi_prime(1.0));
  g.x_max = std::abs(m.h()) + 8.0 * scale;
  g.n_x = n_x;
  g.extension_margin = 200.0 * std::max(1.0, m.xi_prime(1.0));
  return g;
}

void SpaceGrid::validate(const MixingFunction& m) const {
  if (n_x < 3 || n_x % 2 == 0) throw std::invalid_argument("n_x must be odd and >= 3");
  if (quad_nodes < 8) throw std::invalid_argument("quad_nodes must be >= 8");
  if (!(extension_margin > 0.0)) throw std::invalid_argument("extension margin must be positive");
  const double need = std::abs(m.h()) + 6.0 * std::sqrt(m.xi_prime(1.0));
  if (!(x_max > need)) {
    throw std::invalid_argument("x_max must exceed |h| + 6 sqrt(xi'(1)) = " + std::to_string(need));
  }
}

SpaceGrid SpaceGrid::refined() const {
  SpaceGrid g = *this;
  g.n_x = 2 * n_x - 1;
  g.quad_nodes = 2 * quad_nodes;
  return g;
}

PdeSolution::PdeSolution(MixingFunction model, StepOrderParam eta, Boundary kind, double beta,
                         SpaceGrid grid, std::vector<Layer> layers)
    : model_(std::move(model)),
      eta_(std::move(eta)),
      kind_(kind),
      beta_(beta),
      grid_(grid),
      layers_(std::move(layers)) {}

std::vector<double> PdeSolution::times() const {
  std::vector<double> t;
  for (const auto& l : layers_) t.push_back(l.t);
  return t;
}

std::size_t PdeSolution::layer_at_or_before(double t) const {
  const auto it = std::upper_bound(layers_.begin(), layers_.end(), t,
                                   [](double a, const Layer& l) { return a < l.t; });
  if (it == layers_.begin()) return 0;
  return static_cast<std::size_t>(it - layers_.begin()) - 1;
}

PsiValue PdeSolution::eval(double t, double x) const {
  const std::size_t i = layer_at_or_before(t + 1e-12);
  if (std::abs(layers_[i].t - t) > 1e-12) {
    throw std::invalid_argument("unknown slab time " + std::to_string(t));
  }
  return eval_layer(i, x);
}

PsiValue PdeSolution::eval_layer(std::size_t index, double x) const {
  const double X = grid_.x_max;
  if (std::abs(x) > X + grid_.extension_margin) {
    throw std::out_of_range("evaluation point beyond x_max + extension margin");
  }
  const Layer& layer = layers_.at(index);
  if (layer.t == 1.0) return terminal_value(kind_, beta_, x);
  const auto& V = layer.value;
  const auto& D = layer.deriv;
  if (x > X) return {V.back() + (x - X), 1.0};
  if (x < -X) return {V.front() + (-x - X), -1.0};
  const double dx = grid_.dx();
  const double u = (x + X) / dx;
  int i = std::clamp(static_cast<int>(std::floor(u)), 0, grid_.n_x - 2);
  const double s = u - i;
  if (s == 0.0) return {V[i], D[i]};
  if (s == 1.0) return {V[i + 1], D[i + 1]};
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  const double value = h00 * V[i] + h10 * dx * D[i] + h01 * V[i + 1] + h11 * dx * D[i + 1];
  // Monotone cubic for the derivative keeps it inside the data range.
  const double deriv = h00 * D[i] + h10 * dx * pchip_slope(D, i, dx) + h01 * D[i + 1] +
                       h11 * dx * pchip_slope(D, i + 1, dx);
  return {value, std::clamp(deriv, -1.0, 1.0)};
}

PdeSolution solve_parisi(const MixingFunction& m, const StepOrderParam& eta, Boundary kind,
                         double beta, const SpaceGrid& g, std::span<const double> extra_times) {
  check_inputs(m, kind, beta, g);
  const Context ctx{m, eta, kind, beta, g, gauss_legendre(g.quad_nodes)};
  const auto times = layer_times(eta, extra_times);
  const auto nodes = half_nodes(g);
  std::vector<Layer> layers(times.size());
  layers.back() = terminal_layer(g, kind, beta);
  for (std::size_t i = times.size() - 1; i-- > 0;) {
    Layer& out = layers[i];
    out.t = times[i];
    out.value.assign(g.n_x, 0.0);
    out.deriv.assign(g.n_x, 0.0);
    const Layer* next = (i + 1 == times.size() - 1) ? nullptr : &layers[i + 1];
    advance(ctx, next, times[i], times[i + 1], out, nodes);
    mirror(out, g, nodes);
  }
  return PdeSolution(m, eta, kind, beta, g, std::move(layers));
}

PdeSolution solve_zero_t(const MixingFunction& m, const StepOrderParam& gamma, const SpaceGrid& g,
                         std::span<const double> extra_times) {
  return solve_parisi(m, gamma, Boundary::kAbs, 0.0, g, extra_times);
}

PdeSolution solve_finite_beta(const MixingFunction& m, const DiscreteCDF& alpha, double beta,
                              const SpaceGrid& g, std::span<const double> extra_times) {
  if (!(beta > 0.0)) throw std::invalid_argument("inverse temperature must be positive");
  return solve_parisi(m, alpha.scaled(beta), Boundary::kLogCosh, beta, g, extra_times);
}

PsiValue solve_at_origin(const MixingFunction& m, const StepOrderParam& eta, Boundary kind,
                         double beta, const SpaceGrid& g, double x) {
  check_inputs(m, kind, beta, g);
  const Context ctx{m, eta, kind, beta, g, gauss_legendre(g.quad_nodes)};
  const auto times = layer_times(eta, {});
  const auto all = half_nodes(g);

  Layer next = terminal_layer(g, kind, beta);
  bool next_is_terminal = true;
  for (std::size_t i = times.size() - 1; i-- > 1;) {
    Layer out{times[i], std::vector<double>(g.n_x), std::vector<double>(g.n_x)};
    advance(ctx, next_is_terminal ? nullptr : &next, times[i], times[i + 1], out, all);
    mirror(out, g, all);
    next = std::move(out);
    next_is_terminal = false;
  }

  // t = 0: only the nodes the interpolant at |x| touches.
  const double xa = std::abs(x);
  const double u = (xa + g.x_max) / g.dx();
  const int base = std::clamp(static_cast<int>(std::floor(u)), 0, g.n_x - 2);
  std::vector<int> nodes;
  for (int n = base - 1; n <= base + 2; ++n) {
    int k = std::clamp(n, 0, g.n_x - 1);
    if (k < g.center()) k = 2 * g.center() - k;
    if (std::find(nodes.begin(), nodes.end(), k) == nodes.end()) nodes.push_back(k);
  }
  std::sort(nodes.begin(), nodes.end());
  Layer first{0.0, std::vector<double>(g.n_x, 0.0), std::vector<double>(g.n_x, 0.0)};
  advance(ctx, next_is_terminal ? nullptr : &next, times[0], times[1], first, nodes);
  mirror(first, g, nodes);

  const PdeSolution view(m, eta, kind, beta, g, {std::move(first)});
  PsiValue r = view.eval_layer(0, xa);
  if (x < 0.0) r.deriv = -r.deriv;
  return r;
}

LipschitzReport lipschitz_check(const MixingFunction& m, const StepOrderParam& a,
                                const StepOrderParam& b, const SpaceGrid& g, double tolerance) {
  LipschitzReport rep;
  rep.tolerance = tolerance;
  rep.distance = l1_distance(a, b);
  rep.bound = 2.0 * m.xi_second(1.0) * rep.distance;
  const auto sa = solve_zero_t(m, a, g);
  const auto sb = solve_zero_t(m, b, g);
  const auto& va = sa.layers().front().value;
  const auto& vb = sb.layers().front().value;
  for (std::size_t i = 0; i < va.size(); ++i) rep.max_gap = std::max(rep.max_gap, std::abs(va[i] - vb[i]));
  rep.violated = rep.max_gap > rep.bound + tolerance;
  return rep;
}

}  // namespace parisi
