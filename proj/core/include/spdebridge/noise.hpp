#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "spdebridge/rng.hpp"

namespace spdebridge {

/// The lattice of standard-normal driving increments for one path: one entry
/// per mode per step, J x N. Entries stay unscaled; the stepper applies
/// sqrt(q_j dt) at the use site. This is the latent variable that proposal
/// kernels mix in noise space.
struct NoiseDraft {
  Eigen::MatrixXd increments;  // J x N, column n drives step n
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Draws the full lattice from (seed, stream). Entry (j, n) is the stream's
  /// normal variate at index n * J + j, so drafts agree with any other access
  /// pattern over the same stream.
  static NoiseDraft standard(Eigen::Index num_modes, Eigen::Index num_steps,
                             std::uint64_t seed, std::uint64_t stream);

  /// Pairwise-merged draft on a grid with half the steps: column n becomes
  /// (col 2n + col 2n+1) / sqrt(2). Marginals stay standard normal, and the
  /// merged draft drives the same underlying path on the coarser grid.
  NoiseDraft coarsened() const;
};

}  // namespace spdebridge
