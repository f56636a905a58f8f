#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace spdebridge {

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;     // overrides the config seed
  std::optional<std::string> out_dir;    // overrides output.dir
  bool quiet = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;
inline constexpr int kExitValidationFailures = 4;

/// Forward-simulates one path and writes the spectral path table, the field
/// table, the run manifest, and (when an observation is configured) the
/// observed endpoint.
int cmd_forward(const CliOptions& options);

/// Simulates one guided path toward the configured conditioning state.
int cmd_guided(const CliOptions& options);

/// Runs the noise-space MH chain and writes retained path samples, the trace,
/// the mean field, and the manifest.
int cmd_bridge_mh(const CliOptions& options);

/// Runs the correlated pseudo-marginal chain over the observed endpoint.
int cmd_density_cpm(const CliOptions& options);

/// Runs the oracle comparisons and numerical diagnostics; writes a pass/fail
/// report and returns a nonzero code when any check fails.
int cmd_validate(const CliOptions& options);

}  // namespace spdebridge
