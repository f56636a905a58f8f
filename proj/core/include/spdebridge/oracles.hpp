#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spdebridge/guided_solver.hpp"

namespace spdebridge {

/// Closed-form conditioned moments for the linear (zero-drift) model under a
/// coordinate projection: per conditioned mode the scalar Gaussian bridge,
/// per unconditioned mode the plain forward moments.
struct OuBridgeMoments {
  Eigen::MatrixXd mean;      // J x (N+1)
  Eigen::MatrixXd variance;  // J x (N+1)
};

/// Per conditioned scalar mode with decay a and noise q, writing q(t) for the
/// accumulated variance:
///   m(t) = e^{-a t} x0 + q(t) e^{-a (T-t)} / q(T) * (y - e^{-a T} x0)
///   v(t) = q(t) - q(t)^2 e^{-2 a (T-t)} / q(T).
/// Pinned exactly at both ends. Derived by conditioning the joint Gaussian of
/// (state at t, state at T); tests validate it against a direct bivariate
/// sampling oracle before anything else relies on it.
///
/// Rejects non-zero drift kinds and non-projection observations.
OuBridgeMoments ou_bridge_moments(const SpectralModel& model, const Nonlinearity& drift,
                                  const Observation& obs, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& x0, const TimeGrid& grid);

/// Forward paths filtered on an endpoint window: keep a path when every
/// selected mode lands within epsilon of its target. The unselected modes are
/// unconstrained, so survivors approximate the conditioned law only in the
/// selected coordinates.
struct RejectionResult {
  std::vector<Eigen::MatrixXd> paths;        // survivors, J x (N+1) each
  std::vector<std::int64_t> draw_indices;    // which budget draws survived
  std::int64_t kept = 0;
  std::int64_t budget = 0;
};

RejectionResult rejection_forward(const SpectralModel& model, const Nonlinearity& drift,
                                  const Eigen::VectorXd& x0, const TimeGrid& grid,
                                  std::span<const Eigen::Index> target_modes,
                                  const Eigen::VectorXd& targets, double epsilon,
                                  std::int64_t budget, std::uint64_t seed,
                                  std::uint64_t chain = 0);

/// exp(c^2 lag / 2) * (1 + erf(sqrt(c^2 lag / 2))): the factor by which a
/// bounded whitened drift of size c can tilt the conditioned density over a
/// remaining lag. Equals 1 at lag 0 and is nondecreasing in both arguments.
double lambda_bound(double drift_bound, double lag);

}  // namespace spdebridge
