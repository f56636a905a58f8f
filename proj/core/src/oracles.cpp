#include "spdebridge/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace spdebridge {

OuBridgeMoments ou_bridge_moments(const SpectralModel& model, const Nonlinearity& drift,
                                  const Observation& obs, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& x0, const TimeGrid& grid) {
  if (!drift.is_zero())
    throw std::invalid_argument("closed-form bridge moments need the zero drift kind");
  if (!obs.is_projection())
    throw std::invalid_argument("closed-form bridge moments need a coordinate projection");
  if (x0.size() != model.num_modes())
    throw std::invalid_argument("initial state length does not match the model");
  if (y.size() != obs.dim())
    throw std::invalid_argument("conditioning state length does not match the observation");

  const Eigen::Index j_count = model.num_modes();
  const Eigen::Index k = obs.dim();
  const int n_steps = grid.num_steps();
  const double horizon = grid.horizon();

  OuBridgeMoments out;
  out.mean.resize(j_count, n_steps + 1);
  out.variance.resize(j_count, n_steps + 1);

  const Eigen::VectorXd q_total = model.covariance_eigs(horizon);
  for (int n = 0; n <= n_steps; ++n) {
    const double t = grid.node(n);
    const double remaining = horizon - t;
    const Eigen::VectorXd q_t = model.covariance_eigs(t);
    const Eigen::VectorXd decay_t = model.semigroup_factors(t);
    const Eigen::VectorXd decay_rem = model.semigroup_factors(remaining);
    for (Eigen::Index j = 0; j < j_count; ++j) {
      const double forward_mean = decay_t[j] * x0[j];
      if (j < k) {
        const double cross = q_t[j] * decay_rem[j];  // Cov(state_t, state_T)
        const double end_mean = decay_t[j] * decay_rem[j] * x0[j];
        out.mean(j, n) = forward_mean + cross / q_total[j] * (y[j] - end_mean);
        out.variance(j, n) = q_t[j] - cross * cross / q_total[j];
      } else {
        out.mean(j, n) = forward_mean;
        out.variance(j, n) = q_t[j];
      }
    }
  }
  // Exact pinning at the endpoint for the conditioned block.
  for (Eigen::Index j = 0; j < k; ++j) {
    out.mean(j, n_steps) = y[j];
    out.variance(j, n_steps) = 0.0;
  }
  return out;
}

RejectionResult rejection_forward(const SpectralModel& model, const Nonlinearity& drift,
                                  const Eigen::VectorXd& x0, const TimeGrid& grid,
                                  std::span<const Eigen::Index> target_modes,
                                  const Eigen::VectorXd& targets, double epsilon,
                                  std::int64_t budget, std::uint64_t seed,
                                  std::uint64_t chain) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  if (static_cast<Eigen::Index>(target_modes.size()) != targets.size())
    throw std::invalid_argument("target mode and value counts differ");
  for (Eigen::Index mode : target_modes) {
    if (mode < 0 || mode >= model.num_modes())
      throw std::invalid_argument("target mode index out of range");
  }

  RejectionResult result;
  result.budget = budget;

  // Pass 1: endpoints only, in column blocks. Pass 2 resimulates the few
  // survivors with full storage; noise is indexed per draw, so both passes
  // see identical paths.
  constexpr std::int64_t kBlock = 256;
  for (std::int64_t start = 0; start < budget; start += kBlock) {
    const int count = static_cast<int>(std::min(kBlock, budget - start));
    const Eigen::MatrixXd endpoints =
        solve_forward_endpoints(model, drift, x0, grid, seed, chain, start, count);
    for (int p = 0; p < count; ++p) {
      bool inside = true;
      for (Eigen::Index s = 0; s < targets.size(); ++s) {
        if (std::abs(endpoints(target_modes[s], p) - targets[s]) >= epsilon) {
          inside = false;
          break;
        }
      }
      if (inside) result.draw_indices.push_back(start + p);
    }
  }

  result.kept = static_cast<std::int64_t>(result.draw_indices.size());
  result.paths.reserve(result.draw_indices.size());
  for (std::int64_t draw : result.draw_indices) {
    const NoiseDraft noise = NoiseDraft::standard(
        model.num_modes(), grid.num_steps(), seed,
        derive_stream(chain, StreamRole::kForwardDraw, static_cast<std::uint64_t>(draw)));
    result.paths.push_back(solve_forward(model, drift, x0, grid, noise));
  }
  return result;
}

double lambda_bound(double drift_bound, double lag) {
  if (!(drift_bound >= 0.0)) throw std::invalid_argument("drift bound must be nonnegative");
  if (!(lag >= 0.0)) throw std::invalid_argument("lag must be nonnegative");
  const double half = 0.5 * drift_bound * drift_bound * lag;
  return std::exp(half) * (1.0 + std::erf(std::sqrt(half)));
}

}  // namespace spdebridge
