#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "parisi/control.hpp"
#include "parisi/functional.hpp"
#include "parisi/model.hpp"
#include "parisi/optimizer.hpp"
#include "parisi/oracle.hpp"
#include "parisi/order_param.hpp"
#include "parisi/pde.hpp"

namespace parisi {

// Malformed or invalid configuration. The message carries "line L, column C"
// when a location is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSection {
  std::optional<double> x_max;  // default |h| + 8 sqrt(xi'(1))
  int n_x = 2049;
  int quad_nodes = 16;
  std::optional<double> extension_margin;
};

struct SolveSection {
  // Exactly one of gamma (zero temperature) or alpha + beta (finite beta).
  StepOrderParam gamma;
  std::optional<DiscreteCDF> alpha;
  std::optional<double> beta;
  int profile_stride = 8;  // write every n-th node of Psi(0, .)
};

struct OptimizeSection {
  int k_max = 3;
  int restarts = 4;
  int max_iters = 2000;
  double f_tol = 1e-9;
  bool envelope_cap = true;
  double global_cap = 50.0;
  int search_n_x = 513;  // 0 searches on the reference grid
};

struct SweepSection {
  StepOrderParam gamma{std::vector<std::pair<double, double>>{{0.0, 0.0}, {0.3, 1.0}, {0.7, 3.0}}};
  std::vector<double> betas{4, 8, 16, 32, 64, 128, 256};
};

struct ControlSection {
  StepOrderParam gamma = StepOrderParam::constant(1.0);
  int paths = 100000;
  int steps = 512;
  std::vector<std::pair<double, double>> points{{0.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}};
  int random_tables = 2;
};

struct OracleSection {
  std::vector<int> sizes{16, 20, 24};
  int samples = 2000;
  std::optional<double> beta;
  double omega = 2.0 / 3.0;
  bool centered = true;
};

struct RunConfig {
  std::vector<Term> coeffs;
  double h = 0.0;
  GridSection grid;
  SolveSection solve;
  OptimizeSection optimize;
  SweepSection sweep;
  ControlSection control;
  OracleSection oracle;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;

  MixingFunction model() const;
  SpaceGrid space_grid() const;
};

// Parses JSON text. `source` names the input in diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

// Fully defaulted form; parse_config(resolved) reproduces the same run.
nlohmann::json to_json(const RunConfig& cfg);

nlohmann::json to_json(const StepOrderParam& gamma);  // [[t, v], ...]
nlohmann::json to_json(const DiscreteCDF& alpha);     // [[q, mass], ...]
nlohmann::json to_json(const SpaceGrid& g);
nlohmann::json to_json(const FunctionalValue& v);
nlohmann::json to_json(const OptimizationResult& r);
nlohmann::json to_json(const GseReport& r);
nlohmann::json to_json(const McEstimate& e);
nlohmann::json to_json(const VariationalReport& r);
nlohmann::json to_json(const DualityEstimate& d);
nlohmann::json to_json(const OracleResult& r);
nlohmann::json to_json(const Extrapolation& e);
nlohmann::json to_json(const CovarianceReport& r);

StepOrderParam gamma_from_json(const nlohmann::json& j);
DiscreteCDF alpha_from_json(const nlohmann::json& j);

// Minimal CSV writer; numbers are written with round-trip precision.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(const std::vector<std::string>& cells);
  std::string str() const;
  void write(const std::string& path) const;

  static std::string num(double v);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace parisi
