#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dnlens/cli/config.hpp"

namespace dnlens::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;       // I/O and other unexpected errors
inline constexpr int kExitPrecondition = 2;  // config violations, CFL, missing files
inline constexpr int kExitNumerical = 3;     // non-finite values during a solve

struct RunOptions {
  std::filesystem::path config_path;
  std::string out;   // overrides the config's "output"
  unsigned jobs = 0; // caps the config's "jobs"; 0 leaves it
};

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_hash;
  std::string tool_version;
  std::string started;   // UTC, ISO 8601
  std::string finished;
  std::vector<std::filesystem::path> outputs;
  int exit_status = 0;

  std::string to_json() const;
};

std::string tool_version();

// NumericalAbort -> 3, PreconditionError (including CflViolation) -> 2, anything else -> 1.
int exit_code_for(const std::exception& e);

// Output directory: --out, else the config's "output", else the command name.
// Relative paths resolve under $DNLENS_OUTPUT_ROOT when it is set.
std::filesystem::path output_directory(const Config& cfg, const RunOptions& opt);

// Executes `subcommand` (which must match the config's "command"), writes the
// artifacts and manifest.json, and returns the exit status.
int run(const std::string& subcommand, const RunOptions& opt, std::ostream& out, std::ostream& err);

// Prints every violation; returns kExitOk for a valid config and kExitPrecondition otherwise.
int validate(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

}  // namespace dnlens::cli
