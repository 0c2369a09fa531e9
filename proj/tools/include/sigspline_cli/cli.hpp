#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigspline::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Bad command line or config document (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command names in help order.
const std::vector<std::string>& command_names();

/// Default config of a command as pretty JSON text.
std::string default_config(const std::string& command);

/// Defaults, then the config file (if any), then `overrides` as key -> raw
/// text pairs. Throws ConfigError on unknown keys or ill-typed values.
std::string resolve_config(const std::string& command, const std::string& config_path,
                           const std::vector<std::pair<std::string, std::string>>& overrides);

/// Runs a command on a resolved config (JSON text). Throws on failure.
void run_command(const std::string& command, const std::string& resolved, std::ostream& out);

/// Full entry point: parses argv, runs, maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sigspline::cli
