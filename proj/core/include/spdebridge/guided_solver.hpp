#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "spdebridge/noise.hpp"
#include "spdebridge/nonlinearity.hpp"
#include "spdebridge/observation.hpp"
#include "spdebridge/spectral_model.hpp"
#include "spdebridge/time_grid.hpp"

namespace spdebridge {

/// Observation tables for every lag the stepper touches: lag T - t_n for
/// n = 0..N-1. The smallest lag is dt, so the inverse covariance is never
/// formed at lag zero. Built once per (observation, model, grid) and shared
/// read-only across proposals.
class LagTable {
 public:
  LagTable(const Observation& obs, const SpectralModel& model, const TimeGrid& grid);

  const ObservationAtLag& at_step(int n) const { return tables_.at(static_cast<size_t>(n)); }
  const ObservationAtLag& at_horizon() const { return tables_.front(); }
  int num_steps() const noexcept { return static_cast<int>(tables_.size()); }
  const Observation& observation() const noexcept { return observation_; }

 private:
  Observation observation_;
  std::vector<ObservationAtLag> tables_;
};

/// One simulated guided path with its accumulated log-weight and endpoint
/// diagnostics.
struct GuidedRun {
  Eigen::MatrixXd path;        // J x (N+1); column n is the state at node n
  double log_psi = 0.0;        // integral of <drift, guiding force> along the path
  double endpoint_gap = 0.0;   // | y - L x_N |
  double rate_sup = 0.0;       // sup over nodes of discrepancy / envelope(lag)
  Eigen::VectorXd rate_ratios; // per-node ratios; NaN where the envelope is undefined
};

/// sqrt(lag * ln(1/lag)); the envelope the guided discrepancy is expected to
/// stay under. Only meaningful for lag in (0, 1).
double rate_envelope(double lag);

/// The steering force in spectral coordinates:
/// G = L_lag^T R_lag^{-1} (y - L_lag x). The stepper applies the noise-shaped
/// version q_j G_j; the log-weight uses G itself.
Eigen::VectorXd guiding_drift(const ObservationAtLag& lag_table, const Eigen::VectorXd& x_spec,
                              const Eigen::VectorXd& y);

/// One semi-implicit update: the linear decay is treated implicitly, the
/// nonlinearity, extra drift and noise explicitly:
/// x' = (x + dt (F(t, x) + extra) + sqrt(q dt) xi) / (1 + a dt).
Eigen::VectorXd step(const SpectralModel& model, const Nonlinearity& drift, double t,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& increments, double dt,
                     const Eigen::VectorXd* drift_extra = nullptr);

/// Iterates `step` with no extra drift. Deterministic in (inputs, noise).
Eigen::MatrixXd solve_forward(const SpectralModel& model, const Nonlinearity& drift,
                              const Eigen::VectorXd& x0, const TimeGrid& grid,
                              const NoiseDraft& noise);

/// Endpoint states of `count` independent forward paths, advanced as one
/// column block. Path p draws its noise from the stream
/// derive_stream(chain, kForwardDraw, first_draw + p), so results are
/// independent of the batching and reproducible per path index.
Eigen::MatrixXd solve_forward_endpoints(const SpectralModel& model, const Nonlinearity& drift,
                                        const Eigen::VectorXd& x0, const TimeGrid& grid,
                                        std::uint64_t seed, std::uint64_t chain,
                                        std::int64_t first_draw, int count);

/// Simulates the guided path: every step adds the noise-shaped steering force
/// toward y at the remaining lag, and accumulates
/// log_psi += dt * <F(t_n, x_n), G(t_n, x_n)> over left endpoints, so the
/// integrand is never evaluated at the final time.
GuidedRun solve_guided(const SpectralModel& model, const Nonlinearity& drift,
                       const LagTable& lags, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x0, const TimeGrid& grid,
                       const NoiseDraft& noise);

/// Convenience overload that builds the lag table on the fly.
GuidedRun solve_guided(const SpectralModel& model, const Nonlinearity& drift,
                       const Observation& obs, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x0, const TimeGrid& grid,
                       const NoiseDraft& noise);

/// Rate statistics of an arbitrary path against a conditioning state.
/// ratios[n] = |y - L_{T-t_n} x_n| / envelope(T - t_n) for nodes where the
/// envelope is defined; the endpoint discrepancy |y - L x_N| is ratioed
/// against the final step's lag and stored at index N. rate_sup is the sup of
/// the defined ratios, which makes endpoint_gap <= rate_sup * envelope(dt)
/// hold by construction.
struct RateStats {
  Eigen::VectorXd ratios;
  double rate_sup = 0.0;
  double endpoint_gap = 0.0;
};
RateStats compute_rate_stats(const Eigen::MatrixXd& path, const LagTable& lags,
                             const Eigen::VectorXd& y, const TimeGrid& grid);

/// The sup ratio restricted to the last tenth of the grid, where the
/// envelope bound is a limit statement.
double rate_diagnostic(const GuidedRun& run);

}  // namespace spdebridge
