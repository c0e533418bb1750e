#include "parisi/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace parisi {
namespace {

using nlohmann::json;

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Schema errors carry the location of the first occurrence of the key.
class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::string where = source_;
    if (!key.empty()) {
      const auto pos = text_.find("\"" + key + "\"");
      if (pos != std::string::npos) {
        const auto [l, c] = line_col(text_, pos);
        where += ":" + std::to_string(l) + ":" + std::to_string(c) + " (line " + std::to_string(l) +
                 ", column " + std::to_string(c) + ")";
      }
    }
    throw ConfigError(where + ": " + msg);
  }

  void only_keys(const json& obj, const std::string& section, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(section, "section '" + section + "' must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(it.key(), "unknown key '" + it.key() + "' in section '" + section + "'");
  }

  template <class T>
  void get(const json& obj, const char* key, T& out) const {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      fail(key, std::string("key '") + key + "' has the wrong type");
    }
  }

  template <class T>
  void get_opt(const json& obj, const char* key, std::optional<T>& out) const {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    T v{};
    get(obj, key, v);
    out = v;
  }

  template <class Fn>
  auto guarded(const char* key, Fn&& fn) const {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(key, std::string("invalid '") + key + "': " + e.what());
    }
  }

 private:
  const std::string& text_;
  std::string source_;
};

std::vector<std::pair<double, double>> pairs_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of [a, b] pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw std::invalid_argument("expected an array of [a, b] pairs");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

json pairs_to_json(const std::vector<std::pair<double, double>>& p) {
  json a = json::array();
  for (const auto& [x, y] : p) a.push_back({x, y});
  return a;
}

json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

MixingFunction RunConfig::model() const { return MixingFunction(coeffs, h); }

SpaceGrid RunConfig::space_grid() const {
  const MixingFunction m = model();
  SpaceGrid g = SpaceGrid::defaults(m, grid.n_x);
  if (grid.x_max) g.x_max = *grid.x_max;
  if (grid.extension_margin) g.extension_margin = *grid.extension_margin;
  g.quad_nodes = grid.quad_nodes;
  g.validate(m);
  return g;
}

StepOrderParam gamma_from_json(const json& j) { return StepOrderParam(pairs_from_json(j)); }
DiscreteCDF alpha_from_json(const json& j) { return DiscreteCDF(pairs_from_json(j)); }

RunConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [l, c] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(source + ":" + std::to_string(l) + ":" + std::to_string(c) + " (line " +
                      std::to_string(l) + ", column " + std::to_string(c) + "): malformed JSON");
  }
  const Reader rd(text, source);
  rd.only_keys(root, "top level",
               {"model", "grid", "solve", "optimize", "sweep", "control", "oracle", "out_dir", "seed", "threads"});
  RunConfig cfg;

  if (!root.contains("model")) rd.fail("", "missing required section 'model'");
  const json& model = root.at("model");
  rd.only_keys(model, "model", {"coeffs", "h"});
  if (!model.contains("coeffs")) rd.fail("model", "missing 'model.coeffs'");
  rd.guarded("coeffs", [&] {
    for (const auto& [p, c] : pairs_from_json(model.at("coeffs"))) {
      if (p != std::floor(p)) throw std::invalid_argument("degree p must be an integer");
      cfg.coeffs.push_back({static_cast<int>(p), c});
    }
    return 0;
  });
  rd.get(model, "h", cfg.h);
  rd.guarded("coeffs", [&] { return cfg.model(), 0; });

  if (root.contains("grid")) {
    const json& g = root.at("grid");
    rd.only_keys(g, "grid", {"x_max", "n_x", "quad_nodes", "extension_margin"});
    rd.get_opt(g, "x_max", cfg.grid.x_max);
    rd.get(g, "n_x", cfg.grid.n_x);
    rd.get(g, "quad_nodes", cfg.grid.quad_nodes);
    rd.get_opt(g, "extension_margin", cfg.grid.extension_margin);
  }
  rd.guarded("grid", [&] { return cfg.space_grid(), 0; });

  if (root.contains("solve")) {
    const json& s = root.at("solve");
    rd.only_keys(s, "solve", {"gamma", "alpha", "beta", "profile_stride"});
    if (s.contains("gamma")) cfg.solve.gamma = rd.guarded("gamma", [&] { return gamma_from_json(s.at("gamma")); });
    if (s.contains("alpha") && !s.at("alpha").is_null())
      cfg.solve.alpha = rd.guarded("alpha", [&] { return alpha_from_json(s.at("alpha")); });
    rd.get_opt(s, "beta", cfg.solve.beta);
    rd.get(s, "profile_stride", cfg.solve.profile_stride);
    if (cfg.solve.alpha.has_value() != cfg.solve.beta.has_value())
      rd.fail(cfg.solve.alpha ? "alpha" : "beta", "finite-beta solve needs both 'alpha' and 'beta'");
    if (cfg.solve.beta && !(*cfg.solve.beta > 0.0)) rd.fail("beta", "'beta' must be positive");
    if (cfg.solve.profile_stride < 1) rd.fail("profile_stride", "'profile_stride' must be >= 1");
  }

  if (root.contains("optimize")) {
    const json& o = root.at("optimize");
    rd.only_keys(o, "optimize",
                 {"k_max", "restarts", "max_iters", "f_tol", "envelope_cap", "global_cap", "search_n_x"});
    auto& s = cfg.optimize;
    rd.get(o, "k_max", s.k_max);
    rd.get(o, "restarts", s.restarts);
    rd.get(o, "max_iters", s.max_iters);
    rd.get(o, "f_tol", s.f_tol);
    rd.get(o, "envelope_cap", s.envelope_cap);
    rd.get(o, "global_cap", s.global_cap);
    rd.get(o, "search_n_x", s.search_n_x);
    if (s.k_max < 0) rd.fail("k_max", "'k_max' must be >= 0");
    if (s.restarts < 1) rd.fail("restarts", "'restarts' must be >= 1");
    if (s.max_iters < 1) rd.fail("max_iters", "'max_iters' must be >= 1");
    if (!(s.f_tol > 0.0)) rd.fail("f_tol", "'f_tol' must be positive");
    if (!(s.global_cap > 0.0)) rd.fail("global_cap", "'global_cap' must be positive");
    if (s.search_n_x != 0 && (s.search_n_x < 3 || s.search_n_x % 2 == 0))
      rd.fail("search_n_x", "'search_n_x' must be 0 or an odd count >= 3");
  }

  if (root.contains("sweep")) {
    const json& w = root.at("sweep");
    rd.only_keys(w, "sweep", {"gamma", "betas"});
    if (w.contains("gamma")) cfg.sweep.gamma = rd.guarded("gamma", [&] { return gamma_from_json(w.at("gamma")); });
    rd.get(w, "betas", cfg.sweep.betas);
    if (cfg.sweep.betas.empty()) rd.fail("betas", "'betas' must not be empty");
    for (double b : cfg.sweep.betas)
      if (!(b > 0.0)) rd.fail("betas", "'betas' must be positive");
  }

  if (root.contains("control")) {
    const json& c = root.at("control");
    rd.only_keys(c, "control", {"gamma", "paths", "steps", "points", "random_tables"});
    if (c.contains("gamma")) cfg.control.gamma = rd.guarded("gamma", [&] { return gamma_from_json(c.at("gamma")); });
    rd.get(c, "paths", cfg.control.paths);
    rd.get(c, "steps", cfg.control.steps);
    rd.get(c, "random_tables", cfg.control.random_tables);
    if (c.contains("points"))
      cfg.control.points = rd.guarded("points", [&] { return pairs_from_json(c.at("points")); });
    if (cfg.control.paths < 2) rd.fail("paths", "'paths' must be >= 2");
    if (cfg.control.steps < 2) rd.fail("steps", "'steps' must be >= 2");
    for (const auto& [s, x] : cfg.control.points)
      if (!(s >= 0.0 && s < 1.0)) rd.fail("points", "control points need s in [0,1)");
  }

  if (root.contains("oracle")) {
    const json& o = root.at("oracle");
    rd.only_keys(o, "oracle", {"sizes", "samples", "beta", "omega", "centered"});
    rd.get(o, "sizes", cfg.oracle.sizes);
    rd.get(o, "samples", cfg.oracle.samples);
    rd.get_opt(o, "beta", cfg.oracle.beta);
    rd.get(o, "omega", cfg.oracle.omega);
    rd.get(o, "centered", cfg.oracle.centered);
    if (cfg.oracle.sizes.empty()) rd.fail("sizes", "'sizes' must not be empty");
    for (int n : cfg.oracle.sizes)
      if (n < 1 || n > kMaxEnumeration) rd.fail("sizes", "oracle sizes must lie in [1, 28]");
    if (cfg.oracle.samples < 2) rd.fail("samples", "'samples' must be >= 2");
    if (cfg.oracle.beta && !(*cfg.oracle.beta > 0.0)) rd.fail("beta", "'beta' must be positive");
    if (!(cfg.oracle.omega > 0.0)) rd.fail("omega", "'omega' must be positive");
  }

  rd.get(root, "out_dir", cfg.out_dir);
  rd.get(root, "seed", cfg.seed);
  rd.get(root, "threads", cfg.threads);
  if (cfg.threads < 1) rd.fail("threads", "'threads' must be >= 1");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

json to_json(const StepOrderParam& gamma) { return pairs_to_json(gamma.to_pairs()); }
json to_json(const DiscreteCDF& alpha) { return pairs_to_json(alpha.atoms()); }

json to_json(const SpaceGrid& g) {
  return {{"x_max", g.x_max}, {"n_x", g.n_x}, {"quad_nodes", g.quad_nodes}, {"extension_margin", g.extension_margin}};
}

json to_json(const RunConfig& c) {
  json coeffs = json::array();
  for (const auto& t : c.coeffs) coeffs.push_back({t.p, t.c});
  json j;
  j["model"] = {{"coeffs", coeffs}, {"h", c.h}};
  j["grid"] = {{"x_max", opt_num(c.grid.x_max)},
               {"n_x", c.grid.n_x},
               {"quad_nodes", c.grid.quad_nodes},
               {"extension_margin", opt_num(c.grid.extension_margin)}};
  j["solve"] = {{"gamma", to_json(c.solve.gamma)},
                {"alpha", c.solve.alpha ? to_json(*c.solve.alpha) : json(nullptr)},
                {"beta", opt_num(c.solve.beta)},
                {"profile_stride", c.solve.profile_stride}};
  const auto& o = c.optimize;
  j["optimize"] = {{"k_max", o.k_max},         {"restarts", o.restarts},         {"max_iters", o.max_iters},
                   {"f_tol", o.f_tol},         {"envelope_cap", o.envelope_cap}, {"global_cap", o.global_cap},
                   {"search_n_x", o.search_n_x}};
  j["sweep"] = {{"gamma", to_json(c.sweep.gamma)}, {"betas", c.sweep.betas}};
  j["control"] = {{"gamma", to_json(c.control.gamma)},
                  {"paths", c.control.paths},
                  {"steps", c.control.steps},
                  {"points", pairs_to_json(c.control.points)},
                  {"random_tables", c.control.random_tables}};
  j["oracle"] = {{"sizes", c.oracle.sizes},
                 {"samples", c.oracle.samples},
                 {"beta", opt_num(c.oracle.beta)},
                 {"omega", c.oracle.omega},
                 {"centered", c.oracle.centered}};
  j["out_dir"] = c.out_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

json to_json(const FunctionalValue& v) {
  return {{"value", v.value},
          {"pde_value", v.pde_value},
          {"correction", v.correction},
          {"entropy", v.entropy},
          {"grid", to_json(v.grid)}};
}

json to_json(const OptimizationResult& r) {
  json j{{"gamma", to_json(r.gamma)}, {"value", r.value},         {"detail", to_json(r.detail)},
         {"converged", r.converged},  {"q_max", r.q_max},         {"envelope_excess", r.envelope_excess},
         {"jumps", r.gamma.jumps()}};
  if (r.alpha) {
    j["alpha"] = to_json(*r.alpha);
    j["beta"] = r.beta;
  }
  json trace = json::array();
  for (const auto& t : r.trace)
    trace.push_back(
        {{"restart", t.restart}, {"value", t.value}, {"evaluations", t.evaluations}, {"converged", t.converged}});
  j["restarts"] = trace;
  return j;
}

json to_json(const GseReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"k", row.k}, {"value", row.value}, {"gamma", to_json(row.gamma)}, {"converged", row.converged}});
  return {{"rows", rows},
          {"estimate", r.estimate},
          {"extrapolated", r.extrapolated},
          {"grid_error", r.grid_error},
          {"error_bar", r.error_bar},
          {"plateau", r.plateau}};
}

json to_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"paths", e.n_paths}, {"steps", e.n_steps}, {"seed", e.seed}};
}

json to_json(const VariationalReport& r) {
  json sub = json::array();
  for (const auto& c : r.suboptimal)
    sub.push_back({{"policy", c.name}, {"F", to_json(c.estimate)}, {"psi", r.psi}, {"pass", c.pass}});
  return {{"s", r.s},
          {"x", r.x},
          {"psi", r.psi},
          {"policies", sub},
          {"optimal", to_json(r.optimal)},
          {"optimal_half_steps", to_json(r.optimal_half)},
          {"bias_budget", r.bias_budget},
          {"optimal_pass", r.optimal_pass},
          {"pass", r.pass}};
}

json to_json(const DualityEstimate& d) {
  return {{"psi", d.psi},
          {"right_side", to_json(d.right_side)},
          {"F", to_json(d.functional)},
          {"gap", to_json(d.gap)},
          {"difference", to_json(d.difference)}};
}

json to_json(const OracleResult& r) {
  return {{"N", r.n},
          {"samples", r.samples},
          {"seed", r.seed},
          {"beta", opt_num(r.beta)},
          {"mean", r.mean},
          {"std_error", r.std_error},
          {"centered_mean", r.centered_mean},
          {"centered_std_error", r.centered_std_error},
          {"sandwich_ok", r.sandwich_ok}};
}

json to_json(const Extrapolation& e) {
  return {{"a", e.a},
          {"a_error", e.a_error},
          {"b", e.b},
          {"omega", e.omega},
          {"chi2_reduced", std::isfinite(e.chi2_reduced) ? json(e.chi2_reduced) : json(nullptr)},
          {"degenerate", e.degenerate}};
}

json to_json(const CovarianceReport& r) {
  json probes = json::array();
  for (const auto& p : r.probes)
    probes.push_back({{"overlap", p.overlap},
                      {"estimate", p.estimate},
                      {"std_error", p.std_error},
                      {"expected", p.expected},
                      {"pass", p.pass}});
  return {{"N", r.n}, {"samples", r.samples}, {"probes", probes}, {"max_deviation", r.max_deviation}, {"pass", r.pass}};
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CSV row width differs from header");
  rows_.push_back(cells);
  return *this;
}

std::string CsvTable::num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

void CsvTable::write(const std::string& path) const { write_text(path, str()); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace parisi
