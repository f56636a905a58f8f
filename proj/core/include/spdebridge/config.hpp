#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "spdebridge/guided_solver.hpp"
#include "spdebridge/samplers.hpp"

namespace spdebridge {

/// Flat `key = value` configuration text: '#' starts a comment, values may be
/// quoted, keys are dotted paths. Every key must be consumed by the schema;
/// leftovers are configuration errors. Typed getters record the resolved
/// value (including applied defaults) for the run manifest.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_string(const std::string& text,
                                const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  std::string require_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  double require_double(const std::string& key);
  double get_double(const std::string& key, double fallback);
  std::int64_t require_int(const std::string& key);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);

  /// Replaces (or inserts) a value before consumption, e.g. CLI overrides.
  void override_value(const std::string& key, const std::string& value);

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  /// Rejects any key that no getter consumed.
  void finish() const;

  /// Echo of every consumed key with its final value, sorted by key.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, bool> consumed_;
  std::map<std::string, std::string> resolved_;
};

/// Which config sections a command insists on.
struct SetupRequirements {
  bool observation = false;
  bool conditioning_state = false;  // needs y
  bool mh_sampler = false;
  bool cpm_sampler = false;
};

/// Everything a run needs, materialized and validated from one config file.
struct ExperimentSetup {
  SpectralModel model;
  std::shared_ptr<const PhysicalGrid> grid;
  TimeGrid time;
  Nonlinearity drift;
  std::optional<Observation> observation;
  std::optional<Eigen::VectorXd> y;
  Eigen::VectorXd x0;
  std::uint64_t seed;
  std::string output_dir;
  std::optional<MhConfig> mh;
  std::optional<CpmConfig> cpm;
  std::map<std::string, std::string> resolved;
};

ExperimentSetup load_experiment(ConfigMap config, const SetupRequirements& req,
                                std::optional<std::uint64_t> seed_override = std::nullopt,
                                std::optional<std::string> out_override = std::nullopt);

}  // namespace spdebridge
