#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "koopman/systems.hpp"

namespace koopman::cli {

// Exit codes: 0 success, 2 input/usage error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

// Runs one subcommand (simulate, fit, predict, eig, diagnose). args excludes the
// program name. Payloads go to out, human-readable errors to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// {"system": {"kind": ...}, "output_map": {...}} pieces of a simulate config.
ReferenceSystem system_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace koopman::cli
