#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "doctest.h"
#include "parisi/commands.hpp"
#include "parisi/io.hpp"

using namespace parisi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("parisi_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSk = R"({
  "model": {"coeffs": [[2, 0.7071067811865476]], "h": 0.0}
})";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config is fully defaulted") {
  const RunConfig c = parse_config(kSk);
  CHECK(c.coeffs.size() == 1);
  CHECK(c.grid.n_x == 2049);
  CHECK(c.optimize.k_max == 3);
  CHECK(c.oracle.sizes == std::vector<int>{16, 20, 24});
  CHECK(c.solve.gamma == StepOrderParam::constant(0.0));
  const SpaceGrid g = c.space_grid(), ref = SpaceGrid::defaults(MixingFunction::sk());
  CHECK(g.n_x == ref.n_x);
  CHECK(g.x_max == doctest::Approx(ref.x_max).epsilon(1e-14));
  CHECK(g.extension_margin == doctest::Approx(ref.extension_margin).epsilon(1e-14));
}

TEST_CASE("schema errors carry locations") {
  CHECK(error_of(R"({"grid": {}})").find("missing required section 'model'") != std::string::npos);
  const std::string bad_gamma = "{\n  \"model\": {\"coeffs\": [[2, 1]]},\n  \"solve\": {\"gamma\": [[0, 2], [0.5, 1]]}\n}";
  const std::string e1 = error_of(bad_gamma);
  CHECK(e1.find("value 1") != std::string::npos);
  CHECK(e1.find("line 3") != std::string::npos);
  const std::string e2 = error_of("{\n  \"model\": {\"coeffs\": [[2, 1]]},\n  \"optimise\": {}\n}");
  CHECK(e2.find("unknown key 'optimise'") != std::string::npos);
  CHECK(e2.find("line 3") != std::string::npos);
  const std::string e3 = error_of("{\n  \"model\": {\"coeffs\": [[2, 1]]\n}");
  CHECK(e3.find("malformed JSON") != std::string::npos);
  CHECK(e3.find("line 3") != std::string::npos);
  CHECK(error_of(R"({"model": {"coeffs": [[1, 1]]}})").find("p must be >= 2") != std::string::npos);
  CHECK(error_of(R"({"model": {"coeffs": []}})").find("no nonzero coefficient") != std::string::npos);
  CHECK(error_of(R"({"model": {"coeffs": [[2, 1]]}, "grid": {"n_x": "many"}})").find("wrong type") !=
        std::string::npos);
  CHECK(error_of(R"({"model": {"coeffs": [[2, 1]]}, "solve": {"beta": 2}})").find("alpha") != std::string::npos);
}

TEST_CASE("resolved config round-trips") {
  const std::string text = R"({
    "model": {"coeffs": [[2, 0.5], [3, 0.25]], "h": 0.1},
    "grid": {"n_x": 1025},
    "solve": {"alpha": [[0.2, 0.5], [1.0, 0.5]], "beta": 3.0},
    "oracle": {"sizes": [8, 10, 12], "samples": 20, "beta": 4.0},
    "seed": 42
  })";
  const RunConfig a = parse_config(text);
  const auto ja = to_json(a);
  const RunConfig b = parse_config(ja.dump());
  CHECK(to_json(b) == ja);
  CHECK(b.seed == 42);
  CHECK(b.solve.alpha->atoms() == a.solve.alpha->atoms());
}

TEST_CASE("csv formatting") {
  CsvTable t({"a", "b"});
  t.row({CsvTable::num(0.1), CsvTable::num(2.0)});
  CHECK(t.str() == "a,b\n0.10000000000000001,2\n");
  CHECK_THROWS_AS(t.row({"x"}), std::invalid_argument);
}

TEST_CASE("solve command writes records and replays byte-identically") {
  const fs::path dir = scratch("solve");
  RunConfig c = parse_config(kSk);
  c.out_dir = (dir / "first").string();
  const auto s = cmd_solve(c);
  CHECK(s["pass"].get<bool>());
  CHECK(std::abs(s["functional"]["value"].get<double>() - 0.7978845608) < 1e-7);
  CHECK(fs::exists(dir / "first" / "psi_profile.csv"));
  CHECK(fs::exists(dir / "first" / "timing.json"));
  RunConfig replay = load_config((dir / "first" / "resolved_config.json").string());
  replay.out_dir = (dir / "second").string();
  cmd_solve(replay);
  CHECK(slurp(dir / "first" / "value.json") == slurp(dir / "second" / "value.json"));
  CHECK(slurp(dir / "first" / "psi_profile.csv") == slurp(dir / "second" / "psi_profile.csv"));
}

TEST_CASE("sweep and oracle commands") {
  const fs::path dir = scratch("sweep");
  RunConfig c = parse_config(kSk);
  c.out_dir = dir.string();
  c.grid.n_x = 1025;
  c.sweep.betas = {4, 16, 64, 256};
  const auto s = cmd_sweep_beta(c);
  CHECK(s["pass"].get<bool>());
  c.oracle.sizes = {6, 8, 10};
  c.oracle.samples = 40;
  c.oracle.beta = 5.0;
  const auto o = cmd_oracle(c);
  CHECK(o["sandwich_ok"].get<bool>());
  CHECK(o.contains("extrapolation"));
  std::ifstream csv(dir / "oracle_samples.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "seed,N,L_N,F_N");
}

#ifdef PARISI_CLI_PATH
TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("cli");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const std::string good = write("good.json", kSk);
  const std::string nomodel = write("nomodel.json", R"({"grid": {"n_x": 513}})");
  const std::string broken = write("broken.json", "{\n\"model\": \n");
  const std::string cli = PARISI_CLI_PATH;
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " > \"" + (dir / "log.txt").string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };
  CHECK(run("solve --config " + good + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "value.json"));
  CHECK(run("solve --config " + good + " --out " + (dir / "out").string() + " --json --threads 2 --seed 9") == 0);
  CHECK(slurp(dir / "log.txt").find("\"pass\": true") != std::string::npos);
  CHECK(run("solve --config " + nomodel) == 2);
  CHECK(run("solve --config " + broken) == 2);
  CHECK(run("frobnicate --config " + good) == 2);
  CHECK(run("solve") == 2);
}
#endif
