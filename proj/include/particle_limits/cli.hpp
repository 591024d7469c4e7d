#ifndef PARTICLE_LIMITS_CLI_HPP
#define PARTICLE_LIMITS_CLI_HPP

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace particle_limits::cli {

/// Config-level problem (unknown key, type mismatch, range violation).
/// Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully validated settings for one subcommand, with defaults resolved.
/// Unknown keys anywhere in the document are fatal.
struct RunConfig {
  std::string subcommand;
  nlohmann::json settings;
};

/// Builds a RunConfig from an optional JSON file plus dotted-path flag
/// overrides (e.g. --model.n 256); flags win over file keys.
RunConfig parse_config(const std::string& subcommand, const std::vector<std::string>& args);

/// Dispatches a validated config, writing declared artifacts atomically and
/// a one-line summary per (n, ell) to `out`. Returns the process exit code:
/// 0 on success, 1 on runtime failure (with a JSON error report on disk).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full entry point: subcommand dispatch, ConfigError -> 2.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace particle_limits::cli

#endif
