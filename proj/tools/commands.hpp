#pragma once

#include <string>

#include "json.hpp"

namespace mccs::cli {

// Exit codes: 0 success, 2 config error, 3 numeric or hypothesis
// inapplicability, 4 I/O failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

int cmd_keygen(const nlohmann::json& config);
int cmd_encode(const nlohmann::json& config);
int cmd_decode(const nlohmann::json& config);
int cmd_bounds(const nlohmann::json& config);
int cmd_attack(const nlohmann::json& config);
int cmd_convergence(const nlohmann::json& config);
int cmd_gaussianity(const nlohmann::json& config);
int cmd_ric(const nlohmann::json& config);

/// Dispatches on the subcommand name and maps exceptions to exit codes.
int run_command(const std::string& name, const nlohmann::json& config);

}  // namespace mccs::cli
