#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace nehari::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;

struct Invocation {
  /// validate, ray, estimate, solve, continue or sweep.
  std::string command;
  std::string config_path;
  /// Overrides output.dir from the config.
  std::optional<std::string> out_dir;
  /// Overwrite existing outputs and lift the lambda guardrail.
  bool force = false;
};

/// Runs one subcommand; reports go to `out`, diagnostics to `err`.
int run_command(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to run_command.
int run(int argc, char** argv);

}  // namespace nehari::cli
