#pragma once

#include <string>

#include "parisi/io.hpp"

namespace parisi {

// Each command writes its records under cfg.out_dir (created if needed),
// together with resolved_config.json and timing.json, and returns a summary
// whose "pass" field drives the exit status.
nlohmann::json cmd_solve(const RunConfig& cfg);
nlohmann::json cmd_optimize(const RunConfig& cfg);
nlohmann::json cmd_sweep_beta(const RunConfig& cfg);
nlohmann::json cmd_verify_control(const RunConfig& cfg);
nlohmann::json cmd_oracle(const RunConfig& cfg);
nlohmann::json cmd_compare(const RunConfig& cfg);

// Dispatch by subcommand name; throws std::invalid_argument for unknown names.
nlohmann::json run_command(const std::string& name, const RunConfig& cfg);

}  // namespace parisi
