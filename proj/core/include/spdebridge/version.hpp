#pragma once

namespace spdebridge {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever the seed-to-stream derivation in rng.hpp changes, so that
// run manifests can state which rule reproduces them.
inline constexpr const char* kStreamDerivationRule = "philox4x32-streams-v1";

}  // namespace spdebridge
