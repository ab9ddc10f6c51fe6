#pragma once

#include <string>
#include <vector>

namespace splitflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolver = 1;
inline constexpr int kExitInput = 2;

struct Outcome {
  int exit_code = kExitOk;
  /// Report (json or table) on success, empty otherwise.
  std::string out;
  std::string err;
};

/// args excludes the program name, e.g. {"price", "instances/lb2link.json"}.
Outcome run(const std::vector<std::string>& args);

/// Re-serializes a JSON document with the report conventions (12 significant
/// digits for reals, insertion-ordered keys). Emitting a parsed report gives
/// back the same bytes.
std::string reemit(const std::string& json_text);

}  // namespace splitflow::cli
