#pragma once

#include <array>
#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace spdebridge {

/// philox4x32-10 block function. Counter-based: every 128-bit counter maps to
/// an independent 128-bit block under a 64-bit key, with no carried state.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

/// splitmix64 finalizer; used to fold structured ids into stream keys.
std::uint64_t mix64(std::uint64_t x);

/// What a stream of randomness is consumed for. Baked into the stream id so
/// that no two uses of the same (seed, chain, iteration) can collide.
enum class StreamRole : std::uint64_t {
  kNoiseInit = 1,
  kNoiseProposal = 2,
  kAcceptUniform = 3,
  kObservationInit = 4,
  kObservationProposal = 5,
  kParticleInit = 6,
  kParticleRefresh = 7,
  kForwardDraw = 8,
  kGeneric = 9,
};

/// Derives a stream id from (chain, role, iteration, member). Pure function;
/// the mapping is part of the reproducibility contract (see version.hpp).
std::uint64_t derive_stream(std::uint64_t chain, StreamRole role,
                            std::uint64_t iteration = 0, std::uint64_t member = 0);

/// A keyed, stateless stream of random variates: value i is a pure function
/// of (seed, stream, i). Draws can be made in any order or in parallel.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform variate in [0, 1) at the given index.
  double uniform(std::uint64_t index) const;

  /// Standard normal variate at the given index. Consecutive even/odd indices
  /// share one counter block (Box-Muller pair), so sequential fills cost one
  /// philox call per two variates.
  double normal(std::uint64_t index) const;

  /// Fills `out` with normals at indices base_index, base_index+1, ...
  void fill_normal(std::span<double> out, std::uint64_t base_index) const;

  Eigen::VectorXd normal_vector(Eigen::Index n, std::uint64_t base_index = 0) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint32_t, 2> key_;
};

}  // namespace spdebridge
