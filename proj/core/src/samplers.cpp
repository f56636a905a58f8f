#include "spdebridge/samplers.hpp"

#include <cmath>
#include <stdexcept>

namespace spdebridge {

namespace {

// Evenly spaced retention indices in [first, last], at most `count` of them.
std::vector<std::int64_t> retention_indices(std::int64_t first, std::int64_t last,
                                            std::int64_t count) {
  std::vector<std::int64_t> out;
  if (last < first || count <= 0) return out;
  const std::int64_t span = last - first;
  const std::int64_t n = std::min(count, span + 1);
  out.reserve(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t idx =
        n == 1 ? last : first + (span * i) / (n - 1);
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

double logsumexp(const std::vector<double>& values) {
  double peak = values.front();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

}  // namespace

NoiseDraft pcn_mix(const NoiseDraft& current, const NoiseDraft& fresh, double beta) {
  if (current.increments.rows() != fresh.increments.rows() ||
      current.increments.cols() != fresh.increments.cols())
    throw std::invalid_argument("pcn_mix drafts have mismatched shapes");
  if (!(beta >= 0.0) || !(beta <= 1.0))
    throw std::invalid_argument("pcn_mix weight must lie in [0, 1]");
  NoiseDraft out;
  out.seed = current.seed;
  out.stream = current.stream;
  out.increments =
      std::sqrt(1.0 - beta * beta) * current.increments + beta * fresh.increments;
  return out;
}

MhReport mh_bridge(const SpectralModel& model, const Nonlinearity& drift,
                   const Observation& obs, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& x0, const TimeGrid& grid, const MhConfig& cfg) {
  if (!(cfg.beta > 0.0) || !(cfg.beta <= 1.0))
    throw std::invalid_argument("pCN step size beta must lie in (0, 1]");
  if (cfg.iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (cfg.retained_samples < 0)
    throw std::invalid_argument("retained_samples must be nonnegative");
  if (cfg.retained_samples == 0 && cfg.thin < 1)
    throw std::invalid_argument("thin must be at least 1");

  const LagTable lags(obs, model, grid);
  const Eigen::Index j_count = model.num_modes();
  const Eigen::Index n_steps = grid.num_steps();

  NoiseDraft z = NoiseDraft::standard(
      j_count, n_steps, cfg.seed, derive_stream(cfg.chain_id, StreamRole::kNoiseInit));
  GuidedRun current = solve_guided(model, drift, lags, y, x0, grid, z);

  // Retention plan: second half of the chain, evenly thinned.
  const std::int64_t burn_in = cfg.iterations / 2;
  std::vector<std::int64_t> keep =
      cfg.retained_samples > 0
          ? retention_indices(burn_in, cfg.iterations - 1, cfg.retained_samples)
          : [&] {
              std::vector<std::int64_t> all;
              for (std::int64_t i = burn_in; i < cfg.iterations; i += cfg.thin)
                all.push_back(i);
              return all;
            }();
  size_t keep_cursor = 0;

  MhReport report;
  report.seed = cfg.seed;
  report.trace.reserve(static_cast<size_t>(cfg.iterations));
  report.samples.reserve(keep.size());
  report.sample_iterations.reserve(keep.size());

  std::int64_t accepted = 0;
  for (std::int64_t i = 0; i < cfg.iterations; ++i) {
    const NoiseDraft fresh = NoiseDraft::standard(
        j_count, n_steps, cfg.seed,
        derive_stream(cfg.chain_id, StreamRole::kNoiseProposal,
                      static_cast<std::uint64_t>(i)));
    const NoiseDraft proposal_draft = pcn_mix(z, fresh, cfg.beta);
    GuidedRun proposal = solve_guided(model, drift, lags, y, x0, grid, proposal_draft);

    const double log_psi_proposal = proposal.log_psi;
    const double log_ratio = (proposal.log_psi + cfg.log_weight_offset) -
                             (current.log_psi + cfg.log_weight_offset);
    const double u = RngStream(cfg.seed, derive_stream(cfg.chain_id,
                                                       StreamRole::kAcceptUniform,
                                                       static_cast<std::uint64_t>(i)))
                         .uniform(0);
    const bool accept = std::log(u) < log_ratio;
    if (accept) {
      z = proposal_draft;
      current = std::move(proposal);
      ++accepted;
    }

    report.trace.push_back({i, log_psi_proposal, current.log_psi, accept});
    if (keep_cursor < keep.size() && keep[keep_cursor] == i) {
      report.samples.push_back(current);
      report.sample_iterations.push_back(i);
      ++keep_cursor;
    }
  }

  report.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(cfg.iterations);
  return report;
}

double log_density_estimate(const SpectralModel& model, const Nonlinearity& drift,
                            const LagTable& lags, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& x0, const TimeGrid& grid,
                            const std::vector<NoiseDraft>& drafts) {
  if (drafts.empty()) throw std::invalid_argument("density estimate needs at least one draft");
  const ObservationAtLag& horizon = lags.at_horizon();
  const double log_reference =
      horizon.gaussian_log_density(y - horizon.l_matrix * x0);
  std::vector<double> log_weights;
  log_weights.reserve(drafts.size());
  for (const NoiseDraft& draft : drafts) {
    log_weights.push_back(solve_guided(model, drift, lags, y, x0, grid, draft).log_psi);
  }
  return log_reference + logsumexp(log_weights) -
         std::log(static_cast<double>(log_weights.size()));
}

CpmReport cpm_density(const SpectralModel& model, const Nonlinearity& drift,
                      const Observation& obs, const Eigen::VectorXd& x0,
                      const TimeGrid& grid, const CpmConfig& cfg) {
  if (!(cfg.beta > 0.0)) throw std::invalid_argument("random-walk step beta must be positive");
  if (!(cfg.rho >= 0.0) || !(cfg.rho < 1.0))
    throw std::invalid_argument("refresh weight rho must lie in [0, 1)");
  if (cfg.n_particles < 1) throw std::invalid_argument("n_particles must be at least 1");
  if (cfg.iterations < 1) throw std::invalid_argument("iterations must be at least 1");

  const LagTable lags(obs, model, grid);
  const Eigen::Index j_count = model.num_modes();
  const Eigen::Index n_steps = grid.num_steps();
  const Eigen::Index k = obs.dim();

  Eigen::VectorXd y_current;
  if (cfg.y_init.has_value()) {
    if (cfg.y_init->size() != k)
      throw std::invalid_argument("y_init length does not match the observation");
    y_current = *cfg.y_init;
  } else {
    y_current = cfg.beta *
                RngStream(cfg.seed, derive_stream(cfg.chain_id, StreamRole::kObservationInit))
                    .normal_vector(k);
  }

  std::vector<NoiseDraft> drafts;
  drafts.reserve(static_cast<size_t>(cfg.n_particles));
  for (std::int64_t p = 0; p < cfg.n_particles; ++p) {
    drafts.push_back(NoiseDraft::standard(
        j_count, n_steps, cfg.seed,
        derive_stream(cfg.chain_id, StreamRole::kParticleInit, 0,
                      static_cast<std::uint64_t>(p))));
  }
  double log_pi_current =
      log_density_estimate(model, drift, lags, y_current, x0, grid, drafts);

  CpmReport report;
  report.seed = cfg.seed;
  report.samples.resize(k, cfg.iterations);
  report.trace.reserve(static_cast<size_t>(cfg.iterations));

  std::int64_t accepted = 0;
  std::vector<NoiseDraft> proposal_drafts(drafts.size());
  for (std::int64_t i = 0; i < cfg.iterations; ++i) {
    const Eigen::VectorXd y_proposal =
        y_current +
        cfg.beta * RngStream(cfg.seed, derive_stream(cfg.chain_id,
                                                     StreamRole::kObservationProposal,
                                                     static_cast<std::uint64_t>(i)))
                       .normal_vector(k);
    for (size_t p = 0; p < drafts.size(); ++p) {
      const NoiseDraft fresh = NoiseDraft::standard(
          j_count, n_steps, cfg.seed,
          derive_stream(cfg.chain_id, StreamRole::kParticleRefresh,
                        static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(p)));
      proposal_drafts[p] = pcn_mix(drafts[p], fresh, cfg.rho);
    }
    const double log_pi_proposal =
        log_density_estimate(model, drift, lags, y_proposal, x0, grid, proposal_drafts);

    const double u = RngStream(cfg.seed, derive_stream(cfg.chain_id,
                                                       StreamRole::kAcceptUniform,
                                                       static_cast<std::uint64_t>(i)))
                         .uniform(0);
    const bool accept = std::log(u) < log_pi_proposal - log_pi_current;
    if (accept) {
      y_current = y_proposal;
      drafts.swap(proposal_drafts);
      log_pi_current = log_pi_proposal;
      ++accepted;
    }

    report.samples.col(i) = y_current;
    report.trace.push_back({i, log_pi_proposal, log_pi_current, accept});
  }

  report.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(cfg.iterations);
  return report;
}

}  // namespace spdebridge
