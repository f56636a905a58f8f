#include "spdebridge/guided_solver.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace spdebridge {

namespace {

// Shared stepping kernel: drift_total is everything explicit (nonlinearity
// plus steering), already evaluated at (t_n, x_n).
void advance_in_place(const SpectralModel& model, Eigen::VectorXd& x,
                      const Eigen::VectorXd& drift_total, const Eigen::VectorXd& increments,
                      double dt) {
  const auto& a = model.drift_eigs().array();
  const auto& q = model.noise_eigs().array();
  x.array() = (x.array() + dt * drift_total.array() + (q * dt).sqrt() * increments.array()) /
              (1.0 + a * dt);
}

void check_noise_shape(const SpectralModel& model, const TimeGrid& grid,
                       const NoiseDraft& noise) {
  if (noise.increments.rows() != model.num_modes() ||
      noise.increments.cols() != grid.num_steps())
    throw std::invalid_argument("noise draft shape does not match model and time grid");
}

}  // namespace

NoiseDraft NoiseDraft::standard(Eigen::Index num_modes, Eigen::Index num_steps,
                                std::uint64_t seed, std::uint64_t stream) {
  NoiseDraft draft;
  draft.seed = seed;
  draft.stream = stream;
  draft.increments.resize(num_modes, num_steps);
  const RngStream rng(seed, stream);
  // Column-major fill matches the index convention (j, n) -> n * J + j.
  rng.fill_normal(std::span<double>(draft.increments.data(),
                                    static_cast<std::size_t>(num_modes * num_steps)),
                  0);
  return draft;
}

NoiseDraft NoiseDraft::coarsened() const {
  if (increments.cols() % 2 != 0)
    throw std::invalid_argument("coarsening needs an even number of steps");
  NoiseDraft out;
  out.seed = seed;
  out.stream = stream;
  const Eigen::Index half = increments.cols() / 2;
  out.increments.resize(increments.rows(), half);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index n = 0; n < half; ++n) {
    out.increments.col(n) = (increments.col(2 * n) + increments.col(2 * n + 1)) * inv_sqrt2;
  }
  return out;
}

LagTable::LagTable(const Observation& obs, const SpectralModel& model, const TimeGrid& grid)
    : observation_(obs) {
  tables_.reserve(static_cast<size_t>(grid.num_steps()));
  for (int n = 0; n < grid.num_steps(); ++n) {
    tables_.push_back(at_lag(obs, model, grid.horizon() - grid.node(n)));
  }
}

double rate_envelope(double lag) {
  if (!(lag > 0.0) || !(lag < 1.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(lag * std::log(1.0 / lag));
}

Eigen::VectorXd guiding_drift(const ObservationAtLag& lag_table, const Eigen::VectorXd& x_spec,
                              const Eigen::VectorXd& y) {
  const Eigen::VectorXd residual = y - lag_table.l_matrix * x_spec;
  return lag_table.l_matrix.transpose() * lag_table.r_inv_apply(residual);
}

Eigen::VectorXd step(const SpectralModel& model, const Nonlinearity& drift, double t,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& increments, double dt,
                     const Eigen::VectorXd* drift_extra) {
  if (x.size() != model.num_modes() || increments.size() != model.num_modes())
    throw std::invalid_argument("state or increment length does not match the model");
  Eigen::VectorXd total = drift.eval_spectral(t, x);
  if (drift_extra != nullptr) total += *drift_extra;
  Eigen::VectorXd next = x;
  advance_in_place(model, next, total, increments, dt);
  return next;
}

Eigen::MatrixXd solve_forward(const SpectralModel& model, const Nonlinearity& drift,
                              const Eigen::VectorXd& x0, const TimeGrid& grid,
                              const NoiseDraft& noise) {
  check_noise_shape(model, grid, noise);
  if (x0.size() != model.num_modes())
    throw std::invalid_argument("initial state length does not match the model");
  Eigen::MatrixXd path(model.num_modes(), grid.num_steps() + 1);
  path.col(0) = x0;
  Eigen::VectorXd x = x0;
  for (int n = 0; n < grid.num_steps(); ++n) {
    const Eigen::VectorXd f = drift.eval_spectral(grid.node(n), x);
    advance_in_place(model, x, f, noise.increments.col(n), grid.dt());
    path.col(n + 1) = x;
  }
  return path;
}

Eigen::MatrixXd solve_forward_endpoints(const SpectralModel& model, const Nonlinearity& drift,
                                        const Eigen::VectorXd& x0, const TimeGrid& grid,
                                        std::uint64_t seed, std::uint64_t chain,
                                        std::int64_t first_draw, int count) {
  if (x0.size() != model.num_modes())
    throw std::invalid_argument("initial state length does not match the model");
  if (count < 1) throw std::invalid_argument("path count must be positive");

  const Eigen::Index j_count = model.num_modes();
  const Eigen::ArrayXd decay = 1.0 + model.drift_eigs().array() * grid.dt();
  const Eigen::ArrayXd noise_scale = (model.noise_eigs().array() * grid.dt()).sqrt();

  Eigen::MatrixXd states = x0.replicate(1, count);
  Eigen::MatrixXd xi(j_count, count);
  std::vector<RngStream> streams;
  streams.reserve(static_cast<size_t>(count));
  for (int p = 0; p < count; ++p) {
    streams.emplace_back(seed, derive_stream(chain, StreamRole::kForwardDraw,
                                             static_cast<std::uint64_t>(first_draw + p)));
  }
  for (int n = 0; n < grid.num_steps(); ++n) {
    const std::uint64_t base =
        static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(j_count);
    for (int p = 0; p < count; ++p) {
      streams[static_cast<size_t>(p)].fill_normal(
          std::span<double>(xi.col(p).data(), static_cast<std::size_t>(j_count)), base);
    }
    const Eigen::MatrixXd f = drift.eval_spectral_cols(grid.node(n), states);
    states = ((states + grid.dt() * f).array() + xi.array().colwise() * noise_scale)
                 .colwise() /
             decay;
  }
  return states;
}

RateStats compute_rate_stats(const Eigen::MatrixXd& path, const LagTable& lags,
                             const Eigen::VectorXd& y, const TimeGrid& grid) {
  const int n_steps = grid.num_steps();
  if (path.cols() != n_steps + 1)
    throw std::invalid_argument("path node count does not match the time grid");
  RateStats stats;
  stats.ratios =
      Eigen::VectorXd::Constant(n_steps + 1, std::numeric_limits<double>::quiet_NaN());
  double sup = 0.0;
  for (int n = 0; n < n_steps; ++n) {
    const double envelope = rate_envelope(grid.horizon() - grid.node(n));
    if (std::isnan(envelope)) continue;
    const double gap = (y - lags.at_step(n).l_matrix * path.col(n)).norm();
    stats.ratios[n] = gap / envelope;
    sup = std::max(sup, stats.ratios[n]);
  }
  stats.endpoint_gap = (y - lags.observation().observe(path.col(n_steps))).norm();
  const double final_envelope = rate_envelope(grid.dt());
  if (!std::isnan(final_envelope)) {
    stats.ratios[n_steps] = stats.endpoint_gap / final_envelope;
    sup = std::max(sup, stats.ratios[n_steps]);
  }
  stats.rate_sup = sup;
  return stats;
}

double rate_diagnostic(const GuidedRun& run) {
  const Eigen::Index n_nodes = run.rate_ratios.size();
  const Eigen::Index start = (9 * (n_nodes - 1)) / 10;
  double sup = 0.0;
  for (Eigen::Index n = start; n < n_nodes; ++n) {
    const double r = run.rate_ratios[n];
    if (!std::isnan(r)) sup = std::max(sup, r);
  }
  return sup;
}

GuidedRun solve_guided(const SpectralModel& model, const Nonlinearity& drift,
                       const LagTable& lags, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x0, const TimeGrid& grid,
                       const NoiseDraft& noise) {
  check_noise_shape(model, grid, noise);
  if (x0.size() != model.num_modes())
    throw std::invalid_argument("initial state length does not match the model");
  if (lags.num_steps() != grid.num_steps())
    throw std::invalid_argument("lag table does not match the time grid");
  if (y.size() != lags.observation().dim())
    throw std::invalid_argument("conditioning state length does not match the observation");

  const int n_steps = grid.num_steps();
  GuidedRun run;
  run.path.resize(model.num_modes(), n_steps + 1);
  run.path.col(0) = x0;
  run.rate_ratios =
      Eigen::VectorXd::Constant(n_steps + 1, std::numeric_limits<double>::quiet_NaN());

  const auto& q = model.noise_eigs();
  Eigen::VectorXd x = x0;
  double log_psi = 0.0;
  double sup = 0.0;

  for (int n = 0; n < n_steps; ++n) {
    const double t = grid.node(n);
    const ObservationAtLag& table = lags.at_step(n);

    const Eigen::VectorXd residual = y - table.l_matrix * x;
    const Eigen::VectorXd force = table.l_matrix.transpose() * table.r_inv_apply(residual);

    const double envelope = rate_envelope(grid.horizon() - t);
    if (!std::isnan(envelope)) {
      const double ratio = residual.norm() / envelope;
      run.rate_ratios[n] = ratio;
      sup = std::max(sup, ratio);
    }

    const Eigen::VectorXd f = drift.eval_spectral(t, x);
    log_psi += grid.dt() * f.dot(force);

    const Eigen::VectorXd total = f + (q.array() * force.array()).matrix();
    advance_in_place(model, x, total, noise.increments.col(n), grid.dt());
    run.path.col(n + 1) = x;
  }

  run.log_psi = log_psi;
  run.endpoint_gap = (y - lags.observation().observe(x)).norm();
  const double final_envelope = rate_envelope(grid.dt());
  if (!std::isnan(final_envelope)) {
    run.rate_ratios[n_steps] = run.endpoint_gap / final_envelope;
    sup = std::max(sup, run.rate_ratios[n_steps]);
  }
  run.rate_sup = sup;
  return run;
}

GuidedRun solve_guided(const SpectralModel& model, const Nonlinearity& drift,
                       const Observation& obs, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x0, const TimeGrid& grid,
                       const NoiseDraft& noise) {
  const LagTable lags(obs, model, grid);
  return solve_guided(model, drift, lags, y, x0, grid, noise);
}

}  // namespace spdebridge
