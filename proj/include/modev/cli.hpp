#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "modev/harness.hpp"
#include "modev/ratefn.hpp"

namespace modev {

/// Seed used when neither the config file nor the flags give one.
inline constexpr std::uint64_t kDefaultSeed = 20240601;

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;

struct RunConfig {
  std::string task;  ///< validate | simulate | rate | laplace | estimate | ladder
  std::string model = "gauss1";
  std::optional<double> gamma;  ///< overrides the model's gamma
  std::optional<int> n;
  std::vector<int> n_list = {256, 1024, 4096, 16384};
  std::optional<std::int64_t> replications;  ///< task-specific default when absent
  std::optional<double> k;                   ///< absent means auto
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string format = "csv";
  bool json = false;
  std::string dump;
  int threads = 1;
  std::string event;
  std::string functional;
  std::vector<double> target;
  std::string control = "optimal";  ///< optimal | zero
  int m = kDefaultRateGrid;
  int probes = 64;
  bool timing = true;
};

/// Keys accepted in a JSON config file.
const std::vector<std::string>& config_keys();

/// Closest known key within edit distance 2, if any.
std::optional<std::string> suggest_key(const std::string& key);

/// Parses `modev <task> [flags]` (without the program name). A JSON file
/// given by --config is read first and flags override it. Throws
/// ConfigError for unknown or missing keys and malformed input.
RunConfig parse_config(const std::vector<std::string>& args);

/// Checks that every parameter the task needs is present.
void require_task_parameters(const RunConfig& config);

/// "linear v", "quadratic w,y", "threshold v,c,w" or "constant c".
FunctionalPtr parse_functional(const std::string& text, int dim);

/// Runs the task. Returns 0 on success, 1 on numerical failure; writes a
/// report before returning nonzero when partial results exist.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_config + dispatch with the exit code mapping (2 for config errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modev
