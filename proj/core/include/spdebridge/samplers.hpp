#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "spdebridge/guided_solver.hpp"

namespace spdebridge {

/// Entrywise sqrt(1 - beta^2) * current + beta * fresh. Preserves the
/// standard-normal reference law for any beta in [0, 1]; beta = 1 gives
/// independence proposals, beta = 0 returns `current` unchanged.
NoiseDraft pcn_mix(const NoiseDraft& current, const NoiseDraft& fresh, double beta);

struct MhConfig {
  std::int64_t iterations = 1000;
  double beta = 0.1;               // noise-space proposal step, in (0, 1]
  std::int64_t thin = 1;           // retention stride when retained_samples == 0
  std::int64_t retained_samples = 100;  // evenly spaced post-burn-in keeps; 0 = use thin
  std::uint64_t seed = 1;
  std::uint64_t chain_id = 0;
  double log_weight_offset = 0.0;  // diagnostic shift of every log-weight; must not
                                   // change the chain trajectory
};

struct MhTraceRow {
  std::int64_t iteration = 0;
  double log_psi_proposal = 0.0;
  double log_psi_current = 0.0;  // after the accept/reject decision
  bool accepted = false;
};

struct MhReport {
  double acceptance_rate = 0.0;
  std::vector<GuidedRun> samples;
  std::vector<std::int64_t> sample_iterations;
  std::vector<MhTraceRow> trace;
  std::uint64_t seed = 0;
};

/// Markov chain over noise drafts targeting the conditioned path law: propose
/// a pCN mix of the current draft, resimulate the guided path, and accept on
/// the ratio of path weights, exp(log_psi_prop - log_psi_cur). The intractable
/// start-point factors are shared by both sides and cancel, so the weight
/// difference is the whole ratio.
MhReport mh_bridge(const SpectralModel& model, const Nonlinearity& drift,
                   const Observation& obs, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& x0, const TimeGrid& grid, const MhConfig& cfg);

/// Unbiased log-density estimate of the observed endpoint at y: the Gaussian
/// reference density at lag T plus the log-mean of the guided path weights
/// over the supplied drafts.
double log_density_estimate(const SpectralModel& model, const Nonlinearity& drift,
                            const LagTable& lags, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& x0, const TimeGrid& grid,
                            const std::vector<NoiseDraft>& drafts);

struct CpmConfig {
  std::int64_t iterations = 1000;
  double beta = 0.1;        // random-walk step on the observed state
  double rho = 0.1;         // fresh-noise weight in the draft refresh, in [0, 1)
  std::int64_t n_particles = 1;
  std::uint64_t seed = 1;
  std::uint64_t chain_id = 0;
  std::optional<Eigen::VectorXd> y_init;  // overrides the N(0, beta^2 I) start
};

struct CpmTraceRow {
  std::int64_t iteration = 0;
  double log_pi_proposal = 0.0;
  double log_pi_current = 0.0;
  bool accepted = false;
};

struct CpmReport {
  double acceptance_rate = 0.0;
  Eigen::MatrixXd samples;  // k x iterations, column i is the state after update i
  std::vector<CpmTraceRow> trace;
  std::uint64_t seed = 0;
};

/// Correlated pseudo-marginal chain over the observed endpoint: random-walk
/// proposals on y, a joint pCN refresh of all particle drafts with fresh
/// weight rho, and acceptance on the ratio of density estimates. Small rho
/// keeps successive estimates highly correlated, which is what lets a handful
/// of particles survive; rho -> 1 approaches independent estimates per step.
CpmReport cpm_density(const SpectralModel& model, const Nonlinearity& drift,
                      const Observation& obs, const Eigen::VectorXd& x0,
                      const TimeGrid& grid, const CpmConfig& cfg);

}  // namespace spdebridge
