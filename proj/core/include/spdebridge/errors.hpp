#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace spdebridge {

/// Configuration rejected during validation. Carries the dotted key path of
/// the offending entry so callers can point at the exact line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
        key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// A covariance factorization hit a nonpositive pivot. Either the lag is too
/// small for the configured floating precision or the observation rows are
/// rank deficient.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(double lag, const std::string& message)
      : std::runtime_error(message), lag_(lag) {}

  double lag() const noexcept { return lag_; }

 private:
  double lag_;
};

}  // namespace spdebridge
