#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "parisi/commands.hpp"
#include "parisi/parallel.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

void print_summary(const std::string& cmd, const nlohmann::json& s, const std::string& out) {
  std::cout << cmd << ": " << (s.value("pass", false) ? "pass" : "FAIL") << " (outputs in " << out << ")\n";
  if (s.contains("functional")) std::cout << "  value " << s["functional"]["value"] << "\n";
  if (s.contains("report")) std::cout << "  estimate " << s["report"]["estimate"] << "\n";
  if (s.contains("extrapolation"))
    std::cout << "  oracle extrapolation " << s["extrapolation"]["a"] << " +- " << s["extrapolation"]["a_error"]
              << "\n";
  if (s.contains("difference")) std::cout << "  optimizer - oracle " << s["difference"] << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-temperature Parisi formula solver for mixed p-spin ground state energies"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool json_out = false;

  const char* names[][2] = {{"solve", "Evaluate the Parisi functional for a given order parameter"},
                            {"optimize", "Minimize over k-step order parameters, k = 0..k_max"},
                            {"sweep-beta", "Finite-beta embedding convergence for a fixed gamma"},
                            {"verify-control", "Monte Carlo check of the control representation"},
                            {"oracle", "Exhaustive finite-N ground states and extrapolation"},
                            {"compare", "Optimizer versus oracle extrapolation summary"}};
  for (const auto& [name, help] : names) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Root seed (overrides the config)");
    sub->add_option("--out", out, "Output directory (overrides the config)");
    sub->add_option("--threads", threads, "Worker threads (default: PARISI_THREADS or the config)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--json", json_out, "Print the summary record as JSON");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitConfig;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  parisi::RunConfig cfg;
  try {
    cfg = parisi::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (seed) cfg.seed = *seed;
  if (out) cfg.out_dir = *out;
  if (threads) {
    cfg.threads = *threads;
  } else if (std::getenv("PARISI_THREADS")) {
    cfg.threads = parisi::default_threads();
  }

  try {
    const nlohmann::json summary = parisi::run_command(cmd, cfg);
    if (json_out) {
      std::cout << summary.dump(2) << "\n";
    } else {
      print_summary(cmd, summary, cfg.out_dir);
    }
    return summary.value("pass", false) ? kExitPass : kExitFail;
  } catch (const parisi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << cmd << " failed: " << e.what() << "\n";
    return kExitFail;
  }
}
