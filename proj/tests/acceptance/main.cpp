// Acceptance suite: end-to-end statistical checks of the sampler stack, one
// criterion per runnable unit. Every tolerance is pinned here, in code.
//
//   acceptance_tests            runs everything
//   acceptance_tests --only N   runs one criterion
//   acceptance_tests --list     lists criteria

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "spdebridge/commands.hpp"
#include "spdebridge/config.hpp"
#include "spdebridge/csv.hpp"
#include "spdebridge/oracles.hpp"
#include "spdebridge/samplers.hpp"

using namespace spdebridge;

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

// Data-generating seeds for the experiment reproductions. The reference
// experiments condition on one realized endpoint; these seeds fix ours.
constexpr std::uint64_t kMmDataSeed = 2004;
constexpr std::uint64_t kAcDataSeed = 3006;

struct CriterionResult {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok  " : "FAIL") + "  " + what);
  }
};

struct Criterion {
  int id;
  std::string name;
  std::function<CriterionResult()> run;
};

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// Shared experiment setups
// ---------------------------------------------------------------------------

SpectralModel mm_model(int j_count = 100) {
  return SpectralModel(make_dirichlet_laplacian(3e-3, j_count),
                       make_white_noise(1.0, j_count), kPi);
}

Nonlinearity mm_drift(Eigen::Index j_count = 100) {
  return Nonlinearity::michaelis_menten(
      3.0, 0.1, std::make_shared<const PhysicalGrid>(j_count, kPi, 4 * j_count));
}

SpectralModel ac_model(int j_count = 100) {
  return SpectralModel(make_dirichlet_laplacian(2e-3, j_count),
                       make_matern_noise(1e7, 5e-6, 1.0, j_count), kPi);
}

Nonlinearity ac_drift(Eigen::Index j_count = 100) {
  return Nonlinearity::allen_cahn(
      10.0, std::make_shared<const PhysicalGrid>(j_count, kPi, 4 * j_count));
}

TimeGrid production_grid() { return TimeGrid(1.0, 200); }  // dt = 0.005

Eigen::VectorXd data_endpoint(const SpectralModel& model, const Nonlinearity& drift,
                              const TimeGrid& grid, std::uint64_t seed) {
  const NoiseDraft noise =
      NoiseDraft::standard(model.num_modes(), grid.num_steps(), seed,
                           derive_stream(0, StreamRole::kNoiseInit));
  const Eigen::MatrixXd path = solve_forward(
      model, drift, Eigen::VectorXd::Zero(model.num_modes()), grid, noise);
  return path.col(grid.num_steps());
}

double batch_mean_se(const Eigen::VectorXd& series, int n_batches) {
  const Eigen::Index batch = series.size() / n_batches;
  Eigen::VectorXd means(n_batches);
  for (int b = 0; b < n_batches; ++b)
    means[b] = series.segment(b * batch, batch).mean();
  const double grand = means.mean();
  const double var = (means.array() - grand).square().sum() / (n_batches - 1);
  return std::sqrt(var / n_batches);
}

// Asymptotic Kolmogorov-Smirnov p-value.
double ks_p_value(double statistic, double n) {
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * statistic;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    sum += 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
  }
  return std::clamp(sum, 0.0, 1.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// 1. Linear-bridge exactness against the closed-form conditioned moments
// ---------------------------------------------------------------------------

CriterionResult criterion_ou_bridge_exactness() {
  CriterionResult result;
  const int j_count = 32, k = 4;
  const SpectralModel model = mm_model(j_count);
  const TimeGrid grid(1.0, 400);
  const Observation obs = Observation::projection(k, j_count);
  Eigen::VectorXd y(k);
  y << 0.8, -0.5, 0.3, -0.2;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(j_count);
  const Nonlinearity drift = Nonlinearity::zero();

  // Pre-validate the closed form against a direct bivariate sampling oracle
  // before trusting it as the reference (mode 1, all three check times).
  const OuBridgeMoments moments = ou_bridge_moments(model, drift, obs, y, x0, grid);
  {
    const double a = model.drift_eigs()[0], q = model.noise_eigs()[0];
    const RngStream rng(424242, 0);
    for (const double t : {0.25, 0.5, 0.75}) {
      const double var_t = q / (2 * a) * (-std::expm1(-2 * a * t));
      const double var_rem = q / (2 * a) * (-std::expm1(-2 * a * (1.0 - t)));
      const double decay_t = std::exp(-a * t), decay_rem = std::exp(-a * (1.0 - t));
      double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
      const std::int64_t n = 1000000;
      const std::uint64_t base = static_cast<std::uint64_t>(t * 4) * 2 * n;
      for (std::int64_t i = 0; i < n; ++i) {
        const double mid = std::sqrt(var_t) * rng.normal(base + 2 * i);
        const double end = decay_rem * mid + std::sqrt(var_rem) * rng.normal(base + 2 * i + 1);
        s1 += mid;
        s2 += end;
        s11 += mid * mid;
        s22 += end * end;
        s12 += mid * end;
      }
      (void)decay_t;
      const double m1 = s1 / n, m2 = s2 / n;
      const double v1 = s11 / n - m1 * m1, v2 = s22 / n - m2 * m2;
      const double cov = s12 / n - m1 * m2;
      const double oracle_mean = m1 + cov / v2 * (y[0] - m2);
      const double oracle_var = v1 - cov * cov / v2;
      const int node = static_cast<int>(t * 400);
      result.check(std::abs(moments.mean(0, node) - oracle_mean) < 1.5e-3 &&
                       std::abs(moments.variance(0, node) - oracle_var) < 1.5e-3,
                   "closed form vs bivariate oracle at t=" + fmt(t) + ": mean " +
                       fmt(moments.mean(0, node)) + " vs " + fmt(oracle_mean) +
                       ", var " + fmt(moments.variance(0, node)) + " vs " +
                       fmt(oracle_var));
    }
  }

  // 2000 guided paths; per conditioned mode, sample mean and variance at
  // t in {0.25, 0.5, 0.75} within three Monte Carlo standard errors.
  const LagTable lags(obs, model, grid);
  const int n_paths = 2000;
  const int nodes[3] = {100, 200, 300};
  std::vector<Eigen::MatrixXd> states(3, Eigen::MatrixXd(k, n_paths));
  for (int p = 0; p < n_paths; ++p) {
    const NoiseDraft noise = NoiseDraft::standard(
        j_count, grid.num_steps(), 101,
        derive_stream(1, StreamRole::kForwardDraw, static_cast<std::uint64_t>(p)));
    const GuidedRun run = solve_guided(model, drift, lags, y, x0, grid, noise);
    for (int s = 0; s < 3; ++s) states[s].col(p) = run.path.col(nodes[s]).head(k);
  }
  for (int s = 0; s < 3; ++s) {
    for (int j = 0; j < k; ++j) {
      const double mean = states[s].row(j).mean();
      const double var =
          (states[s].row(j).array() - mean).square().sum() / (n_paths - 1);
      const double true_mean = moments.mean(j, nodes[s]);
      const double true_var = moments.variance(j, nodes[s]);
      const double se_mean = std::sqrt(true_var / n_paths);
      const double se_var = true_var * std::sqrt(2.0 / (n_paths - 1));
      result.check(std::abs(mean - true_mean) <= 3.0 * se_mean,
                   "mode " + std::to_string(j + 1) + " mean at node " +
                       std::to_string(nodes[s]) + ": " + fmt(mean) + " vs " +
                       fmt(true_mean) + " (3se = " + fmt(3 * se_mean) + ")");
      result.check(std::abs(var - true_var) <= 3.0 * se_var,
                   "mode " + std::to_string(j + 1) + " variance at node " +
                       std::to_string(nodes[s]) + ": " + fmt(var) + " vs " +
                       fmt(true_var) + " (3se = " + fmt(3 * se_var) + ")");
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// 2. Zero drift degenerates the MH chain to certain acceptance
// ---------------------------------------------------------------------------

CriterionResult criterion_degenerate_acceptance() {
  CriterionResult result;
  const int j_count = 16;
  const SpectralModel model = mm_model(j_count);
  const TimeGrid grid(1.0, 100);
  const Observation obs = Observation::projection(4, j_count);
  Eigen::VectorXd y(4);
  y << 0.5, -0.2, 0.1, 0.3;
  MhConfig cfg;
  cfg.iterations = 1000;
  cfg.beta = 0.2;
  cfg.seed = 11;
  const MhReport report = mh_bridge(model, Nonlinearity::zero(), obs, y,
                                    Eigen::VectorXd::Zero(j_count), grid, cfg);
  result.check(report.acceptance_rate == 1.0,
               "acceptance rate is exactly 1.0 over 1000 iterations: got " +
                   fmt(report.acceptance_rate));
  return result;
}

// ---------------------------------------------------------------------------
// 3. Saturating-reaction experiment, scaled chain
// ---------------------------------------------------------------------------

CriterionResult criterion_mm_acceptance() {
  CriterionResult result;
  const SpectralModel model = mm_model();
  const Nonlinearity drift = mm_drift();
  const TimeGrid grid = production_grid();
  const Observation obs = Observation::projection(10, 100);
  const Eigen::VectorXd y =
      obs.observe(data_endpoint(model, drift, grid, kMmDataSeed));

  MhConfig cfg;
  cfg.iterations = 5000;
  cfg.beta = 0.08;
  cfg.seed = 12;
  cfg.retained_samples = 100;
  const MhReport report = mh_bridge(model, drift, obs, y,
                                    Eigen::VectorXd::Zero(100), grid, cfg);
  result.check(report.acceptance_rate >= 0.15 && report.acceptance_rate <= 0.40,
               "acceptance rate in [0.15, 0.40]: got " + fmt(report.acceptance_rate) +
                   " (full-length reference value is near 0.26)");
  return result;
}

// ---------------------------------------------------------------------------
// 4. Cubic-reaction experiment, scaled chain
// ---------------------------------------------------------------------------

CriterionResult criterion_ac_acceptance() {
  CriterionResult result;
  const SpectralModel model = ac_model();
  const Nonlinearity drift = ac_drift();
  const TimeGrid grid = production_grid();
  const Observation obs = Observation::projection(20, 100);
  const Eigen::VectorXd y =
      obs.observe(data_endpoint(model, drift, grid, kAcDataSeed));

  MhConfig cfg;
  cfg.iterations = 5000;
  cfg.beta = 0.07;
  cfg.seed = 13;
  cfg.retained_samples = 100;
  const MhReport report = mh_bridge(model, drift, obs, y,
                                    Eigen::VectorXd::Zero(100), grid, cfg);
  result.check(report.acceptance_rate >= 0.15 && report.acceptance_rate <= 0.40,
               "acceptance rate in [0.15, 0.40]: got " + fmt(report.acceptance_rate) +
                   " (full-length reference value is near 0.27)");
  return result;
}

// ---------------------------------------------------------------------------
// 5. Rejection-survivor counts at the reference windows
// ---------------------------------------------------------------------------

CriterionResult criterion_rejection_counts() {
  CriterionResult result;
  const TimeGrid grid = production_grid();

  {
    const SpectralModel model = mm_model();
    const Nonlinearity drift = mm_drift();
    const Eigen::VectorXd endpoint = data_endpoint(model, drift, grid, kMmDataSeed);
    const std::vector<Eigen::Index> modes = {0, 1};
    Eigen::VectorXd targets(2);
    targets << endpoint[0], endpoint[1];
    const RejectionResult kept = rejection_forward(
        model, drift, Eigen::VectorXd::Zero(100), grid, modes, targets, 0.2, 100000, 14);
    result.check(kept.kept >= 20 && kept.kept <= 90,
                 "saturating-reaction survivors in [20, 90]: got " +
                     std::to_string(kept.kept) + " of 100000 (reference run kept 47)");
  }
  {
    const SpectralModel model = ac_model();
    const Nonlinearity drift = ac_drift();
    const Eigen::VectorXd endpoint = data_endpoint(model, drift, grid, kAcDataSeed);
    Eigen::Index j_max = 0, j_min = 0;
    endpoint.maxCoeff(&j_max);
    endpoint.minCoeff(&j_min);
    const std::vector<Eigen::Index> modes = {j_max, j_min};
    Eigen::VectorXd targets(2);
    targets << endpoint[j_max], endpoint[j_min];
    const RejectionResult kept = rejection_forward(
        model, drift, Eigen::VectorXd::Zero(100), grid, modes, targets, 0.05, 100000, 15);
    result.check(kept.kept >= 25 && kept.kept <= 100,
                 "cubic-reaction survivors in [25, 100]: got " +
                     std::to_string(kept.kept) + " of 100000 (reference run kept 52), "
                     "window modes " + std::to_string(j_max + 1) + " and " +
                     std::to_string(j_min + 1));
  }
  return result;
}

// ---------------------------------------------------------------------------
// 6. Chain samples vs rejection survivors on the dominant modes
// ---------------------------------------------------------------------------

CriterionResult criterion_bridge_vs_rejection() {
  CriterionResult result;
  const SpectralModel model = mm_model();
  const Nonlinearity drift = mm_drift();
  const TimeGrid grid = production_grid();
  const Eigen::VectorXd endpoint = data_endpoint(model, drift, grid, kMmDataSeed);

  // Both routes condition on the same two dominant modes, so the rejection
  // survivors are a direct oracle for the chain: the chain pins the modes
  // exactly while the survivors sit in the epsilon window around the same
  // values.
  const Observation obs = Observation::projection(2, 100);
  const Eigen::VectorXd y = obs.observe(endpoint);

  // Long enough for the weight correction to pull the ensemble from the
  // guided law onto the conditioned law; the second half is retained.
  MhConfig cfg;
  cfg.iterations = 20000;
  cfg.beta = 0.08;
  cfg.seed = 16;
  cfg.retained_samples = 100;
  const MhReport chain = mh_bridge(model, drift, obs, y,
                                   Eigen::VectorXd::Zero(100), grid, cfg);

  const std::vector<Eigen::Index> modes = {0, 1};
  Eigen::VectorXd targets(2);
  targets << endpoint[0], endpoint[1];
  const RejectionResult survivors = rejection_forward(
      model, drift, Eigen::VectorXd::Zero(100), grid, modes, targets, 0.2, 100000, 14);
  result.check(survivors.kept >= 10,
               "enough survivors to compare: " + std::to_string(survivors.kept));
  if (survivors.kept < 10) return result;

  // At the final node the chain endpoint carries the last step's uncorrected
  // drift contribution, dt * F_j, while the window-conditioned survivors
  // center on the window; allow exactly that term there.
  const double drift_bound = drift.pointwise_bound().value_or(0.0);
  const int nodes[5] = {40, 80, 120, 160, 200};  // t = 0.2 .. 1.0
  for (const Eigen::Index mode : modes) {
    for (const int node : nodes) {
      Eigen::VectorXd chain_vals(static_cast<Eigen::Index>(chain.samples.size()));
      for (size_t s = 0; s < chain.samples.size(); ++s)
        chain_vals[static_cast<Eigen::Index>(s)] = chain.samples[s].path(mode, node);
      Eigen::VectorXd rej_vals(survivors.kept);
      for (std::int64_t s = 0; s < survivors.kept; ++s)
        rej_vals[s] = survivors.paths[static_cast<size_t>(s)](mode, node);

      const double chain_mean = chain_vals.mean();
      const double rej_mean = rej_vals.mean();
      // Batch means absorb the chain autocorrelation of the thinned samples.
      const double se_chain = batch_mean_se(chain_vals, 10);
      const double rej_var =
          (rej_vals.array() - rej_mean).square().sum() / (survivors.kept - 1);
      const double se_rej = std::sqrt(rej_var / survivors.kept);
      const double combined = std::sqrt(se_chain * se_chain + se_rej * se_rej);
      const double allowance = node == grid.num_steps() ? grid.dt() * drift_bound : 0.0;
      result.check(std::abs(chain_mean - rej_mean) <= 3.0 * combined + allowance,
                   "mode " + std::to_string(mode + 1) + " mean at node " +
                       std::to_string(node) + ": chain " + fmt(chain_mean) +
                       " vs rejection " + fmt(rej_mean) + " (3se = " +
                       fmt(3.0 * combined) +
                       (allowance > 0 ? ", endpoint allowance " + fmt(allowance) : "") +
                       ")");
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// 7. Pseudo-marginal chain targets the endpoint law
// ---------------------------------------------------------------------------

CriterionResult criterion_cpm_target() {
  CriterionResult result;

  // Exact case: zero drift, the chain must reproduce the reference Gaussian.
  {
    const int j_count = 32, k = 2;
    const SpectralModel model = mm_model(j_count);
    const TimeGrid grid(1.0, 100);
    const Observation obs = Observation::projection(k, j_count);
    CpmConfig cfg;
    cfg.iterations = 40000;
    cfg.beta = 0.35;
    cfg.rho = 0.1;
    cfg.n_particles = 1;
    cfg.seed = 17;
    const CpmReport report = cpm_density(model, Nonlinearity::zero(), obs,
                                         Eigen::VectorXd::Zero(j_count), grid, cfg);
    const Eigen::Index burn = report.samples.cols() / 2;
    const Eigen::MatrixXd tail = report.samples.rightCols(report.samples.cols() - burn);
    const Eigen::VectorXd target_var = model.covariance_eigs(1.0).head(k);

    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::VectorXd series = tail.row(j).transpose();
      const double mean = series.mean();
      const double se = batch_mean_se(series, 20);
      result.check(std::abs(mean) <= 3.0 * se,
                   "exact case coordinate " + std::to_string(j + 1) + " mean " +
                       fmt(mean) + " within 3se = " + fmt(3.0 * se));
      const double var = (series.array() - mean).square().sum() / (series.size() - 1);
      const double ratio = var / target_var[j];
      result.check(ratio >= 0.85 && ratio <= 1.15,
                   "exact case coordinate " + std::to_string(j + 1) +
                       " variance ratio in [0.85, 1.15]: got " + fmt(ratio));

      // KS on thinned, near-independent samples against the exact normal.
      const int stride = 40;
      std::vector<double> thinned;
      for (Eigen::Index i = 0; i < series.size(); i += stride)
        thinned.push_back(series[i] / std::sqrt(target_var[j]));
      std::sort(thinned.begin(), thinned.end());
      double ks = 0.0;
      const double n = static_cast<double>(thinned.size());
      for (size_t i = 0; i < thinned.size(); ++i) {
        const double cdf = normal_cdf(thinned[i]);
        ks = std::max(ks, std::abs(cdf - (i + 1) / n));
        ks = std::max(ks, std::abs(cdf - i / n));
      }
      const double p = ks_p_value(ks, n);
      result.check(p > 0.01, "exact case coordinate " + std::to_string(j + 1) +
                                 " KS p-value > 0.01: got " + fmt(p));
    }
  }

  // Nonlinear case: chain moments against forward-simulated endpoint moments.
  // The reaction is kept at a moderate strength (bounded drift, sup 2): the
  // estimator spread is then a few units of log-weight and the chain mixes.
  // At the full-strength reaction the guided log-weights spread over tens of
  // units and no feasible particle count lets a pseudo-marginal chain move.
  {
    const int j_count = 64, k = 2;
    const SpectralModel model = mm_model(j_count);
    const Nonlinearity drift = Nonlinearity::michaelis_menten(
        1.0, 0.5, std::make_shared<const PhysicalGrid>(j_count, kPi, 4 * j_count));
    const TimeGrid grid(1.0, 100);
    const Observation obs = Observation::projection(k, j_count);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(j_count);

    const int n_forward = 10000;
    const Eigen::MatrixXd endpoints =
        solve_forward_endpoints(model, drift, x0, grid, 18, 0, 0, n_forward);

    CpmConfig cfg;
    cfg.iterations = 24000;
    cfg.beta = 0.3;
    cfg.rho = 0.1;
    cfg.n_particles = 8;
    cfg.seed = 19;
    // Start at the forward mean rather than the origin default.
    cfg.y_init = endpoints.topRows(k).rowwise().mean();
    const CpmReport report = cpm_density(model, drift, obs, x0, grid, cfg);
    const Eigen::Index burn = report.samples.cols() / 2;
    const Eigen::MatrixXd tail = report.samples.rightCols(report.samples.cols() - burn);

    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::VectorXd chain_series = tail.row(j).transpose();
      const Eigen::VectorXd forward_series = endpoints.row(j).transpose();
      const double chain_mean = chain_series.mean();
      const double forward_mean = forward_series.mean();
      const double se_chain = batch_mean_se(chain_series, 20);
      const double forward_var =
          (forward_series.array() - forward_mean).square().sum() / (n_forward - 1);
      const double se_forward = std::sqrt(forward_var / n_forward);
      const double combined =
          std::sqrt(se_chain * se_chain + se_forward * se_forward);
      result.check(std::abs(chain_mean - forward_mean) <= 3.0 * combined,
                   "nonlinear case coordinate " + std::to_string(j + 1) + " mean: chain " +
                       fmt(chain_mean) + " vs forward " + fmt(forward_mean) +
                       " (3se = " + fmt(3.0 * combined) + ")");

      const double chain_var =
          (chain_series.array() - chain_mean).square().sum() / (chain_series.size() - 1);
      // Effective chain size from the batch-mean standard error.
      const double n_eff = chain_var / (se_chain * se_chain);
      const double se_var_combined =
          std::sqrt(2.0 / n_eff + 2.0 / n_forward) * forward_var;
      result.check(std::abs(chain_var - forward_var) <= 3.0 * se_var_combined,
                   "nonlinear case coordinate " + std::to_string(j + 1) +
                       " variance: chain " + fmt(chain_var) + " vs forward " +
                       fmt(forward_var) + " (3se = " + fmt(3.0 * se_var_combined) + ")");
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// 8. Endpoint-rate diagnostic under step refinement
// ---------------------------------------------------------------------------

CriterionResult criterion_rate_refinement() {
  CriterionResult result;
  const SpectralModel model = mm_model();
  const Nonlinearity drift = mm_drift();
  const Observation obs = Observation::projection(10, 100);
  const Eigen::VectorXd y =
      obs.observe(data_endpoint(model, drift, production_grid(), kMmDataSeed));
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(100);

  // Fixed coupled noise: one underlying fine draft, merged pairwise.
  const auto tail_rate = [&](const NoiseDraft& draft) {
    const TimeGrid grid(1.0, static_cast<int>(draft.increments.cols()));
    const GuidedRun run = solve_guided(model, drift, obs, y, x0, grid, draft);
    return rate_diagnostic(run);
  };
  const NoiseDraft fine = NoiseDraft::standard(100, 400, 20, 7);
  const NoiseDraft mid = fine.coarsened();
  const NoiseDraft coarse = mid.coarsened();
  const double r400 = tail_rate(fine), r200 = tail_rate(mid), r100 = tail_rate(coarse);
  const double hi = std::max({r400, r200, r100});
  const double lo = std::min({r400, r200, r100});
  result.check(hi / lo < 2.0,
               "tail rate ratio varies by less than a factor 2 across dt in "
               "{1/100, 1/200, 1/400}: got " +
                   fmt(r100) + ", " + fmt(r200) + ", " + fmt(r400));

  // Median endpoint gap over coupled drafts decreases under refinement.
  const int n_drafts = 16;
  std::vector<double> gap100, gap200, gap400;
  for (int d = 0; d < n_drafts; ++d) {
    const NoiseDraft f = NoiseDraft::standard(
        100, 400, 21, derive_stream(3, StreamRole::kForwardDraw,
                                    static_cast<std::uint64_t>(d)));
    const NoiseDraft m = f.coarsened();
    const NoiseDraft c = m.coarsened();
    const auto gap = [&](const NoiseDraft& draft) {
      const TimeGrid grid(1.0, static_cast<int>(draft.increments.cols()));
      return solve_guided(model, drift, obs, y, x0, grid, draft).endpoint_gap;
    };
    gap400.push_back(gap(f));
    gap200.push_back(gap(m));
    gap100.push_back(gap(c));
  }
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const double g100 = median(gap100), g200 = median(gap200), g400 = median(gap400);
  result.check(g100 > g200 && g200 > g400,
               "median endpoint gap decreases with refinement: " + fmt(g100) + " > " +
                   fmt(g200) + " > " + fmt(g400));
  return result;
}

// ---------------------------------------------------------------------------
// 9. Inverse observed covariance blows up at the linear rate
// ---------------------------------------------------------------------------

CriterionResult criterion_blowup_rate() {
  CriterionResult result;
  const SpectralModel model = mm_model();
  std::vector<double> lags;
  for (int i = 0; i < 25; ++i) lags.push_back(1e-4 * std::pow(1000.0, i / 24.0));

  const BlowupRateReport proj =
      blowup_rate_diagnostic(Observation::projection(10, 100), model, lags);
  result.check(proj.p_hat >= 0.9 && proj.p_hat <= 1.1,
               "projection observation exponent in [0.9, 1.1]: got " + fmt(proj.p_hat));

  // Weighted functional: the normalized constant field.
  const PhysicalGrid grid(100, kPi, 400);
  Eigen::VectorXd w = grid.to_spectral(Eigen::VectorXd::Ones(400));
  w /= w.norm();
  const BlowupRateReport weighted =
      blowup_rate_diagnostic(Observation::weighted(w.transpose()), model, lags);
  result.check(weighted.p_hat >= 0.9 && weighted.p_hat <= 1.1,
               "constant-field weight exponent in [0.9, 1.1]: got " + fmt(weighted.p_hat));
  return result;
}

// ---------------------------------------------------------------------------
// 10. Structural invariants (fast)
// ---------------------------------------------------------------------------

CriterionResult criterion_structural() {
  CriterionResult result;

  // pCN mixing preserves the reference law.
  {
    NoiseDraft z = NoiseDraft::standard(64, 64, 22, 0);
    for (int i = 0; i < 100; ++i) {
      z = pcn_mix(z, NoiseDraft::standard(64, 64, 22, static_cast<std::uint64_t>(i + 1)),
                  0.4);
    }
    const Eigen::Map<const Eigen::VectorXd> flat(z.increments.data(), z.increments.size());
    const double n = static_cast<double>(flat.size());
    const double mean = flat.mean();
    const double var = (flat.array() - mean).square().sum() / (n - 1);
    result.check(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n),
                 "pCN variance preserved after 100 mixes: got " + fmt(var));
  }

  // Transform round trip.
  {
    const PhysicalGrid grid(64, kPi, 256);
    const Eigen::VectorXd coeffs = RngStream(23, 1).normal_vector(64);
    const double err =
        (grid.to_spectral(grid.to_physical(coeffs)) - coeffs).norm() / coeffs.norm();
    result.check(err < 1e-8, "transform round trip below 1e-8: got " + fmt(err));
  }

  // Left-Riemann path-weight refinement: the quadrature differences shrink
  // under coupled step halving.
  {
    const SpectralModel model = mm_model();
    const Nonlinearity drift = mm_drift();
    const Observation obs = Observation::projection(10, 100);
    const Eigen::VectorXd y =
        obs.observe(data_endpoint(model, drift, production_grid(), kMmDataSeed));
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(100);
    const int n_drafts = 64;
    std::vector<double> d1, d2, d3;
    for (int d = 0; d < n_drafts; ++d) {
      const NoiseDraft n800 = NoiseDraft::standard(
          100, 800, 24, derive_stream(4, StreamRole::kForwardDraw,
                                      static_cast<std::uint64_t>(d)));
      const NoiseDraft n400 = n800.coarsened();
      const NoiseDraft n200 = n400.coarsened();
      const NoiseDraft n100 = n200.coarsened();
      const auto log_psi = [&](const NoiseDraft& draft) {
        const TimeGrid grid(1.0, static_cast<int>(draft.increments.cols()));
        return solve_guided(model, drift, obs, y, x0, grid, draft).log_psi;
      };
      const double l100 = log_psi(n100), l200 = log_psi(n200), l400 = log_psi(n400),
                   l800 = log_psi(n800);
      d1.push_back(std::abs(l100 - l200));
      d2.push_back(std::abs(l200 - l400));
      d3.push_back(std::abs(l400 - l800));
    }
    const auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v[v.size() / 2];
    };
    const double m1 = median(d1), m2 = median(d2), m3 = median(d3);
    result.check(m1 > m2 && m2 > m3,
                 "median log-weight quadrature differences decrease: " + fmt(m1) + " > " +
                     fmt(m2) + " > " + fmt(m3));
  }

  // Semigroup composition.
  {
    const SpectralModel model = mm_model();
    const Eigen::VectorXd lhs = model.semigroup_factors(0.9);
    const Eigen::VectorXd rhs =
        model.semigroup_factors(0.4).cwiseProduct(model.semigroup_factors(0.5));
    const double err = (lhs - rhs).cwiseAbs().maxCoeff();
    result.check(err < 1e-14, "semigroup composition exact to 1e-14: got " + fmt(err));
  }

  // Constant weight offsets cannot change the chain.
  {
    const int j_count = 8;
    const SpectralModel model = mm_model(j_count);
    const Nonlinearity drift = Nonlinearity::michaelis_menten(
        3.0, 0.1, std::make_shared<const PhysicalGrid>(j_count, kPi, 32));
    const TimeGrid grid(1.0, 32);
    const Observation obs = Observation::projection(2, j_count);
    Eigen::VectorXd y(2);
    y << 0.5, -0.2;
    MhConfig cfg;
    cfg.iterations = 80;
    cfg.beta = 0.3;
    cfg.seed = 25;
    cfg.retained_samples = 8;
    const MhReport plain =
        mh_bridge(model, drift, obs, y, Eigen::VectorXd::Zero(j_count), grid, cfg);
    cfg.log_weight_offset = 750.0;
    const MhReport shifted =
        mh_bridge(model, drift, obs, y, Eigen::VectorXd::Zero(j_count), grid, cfg);
    bool identical = plain.samples.size() == shifted.samples.size();
    for (size_t i = 0; identical && i < plain.trace.size(); ++i)
      identical = plain.trace[i].accepted == shifted.trace[i].accepted;
    for (size_t i = 0; identical && i < plain.samples.size(); ++i)
      identical = plain.samples[i].path == shifted.samples[i].path;
    result.check(identical, "chain trajectory bit-identical under a +750 weight offset");
  }

  // Double runs produce byte-identical outputs.
  {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() /
                          ("spdebridge-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(base);
    const std::string config_path = (base / "run.cfg").string();
    {
      std::ofstream out(config_path);
      out << "seed = 4\nmodel.kind = dirichlet_laplacian\nmodel.eta = 3e-3\n"
             "model.J = 12\nnoise.kind = white\nnoise.sigma0 = 1\n"
             "nonlinearity.kind = michaelis_menten\nnonlinearity.zeta1 = 3\n"
             "nonlinearity.zeta2 = 0.1\ngrid.T = 1\ngrid.N = 40\n";
    }
    const auto slurp = [](const std::string& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    bool equal = true;
    for (const char* sub : {"a", "b"}) {
      CliOptions options;
      options.config_path = config_path;
      options.out_dir = (base / sub).string();
      options.quiet = true;
      equal = equal && (cmd_forward(options) == kExitOk);
    }
    equal = equal && slurp((base / "a/path_spectral.csv").string()) ==
                         slurp((base / "b/path_spectral.csv").string());
    equal = equal && slurp((base / "a/field.csv").string()) ==
                         slurp((base / "b/field.csv").string());
    result.check(equal, "double run produces byte-identical tables");
    std::error_code ec;
    fs::remove_all(base, ec);
  }
  return result;
}

// ---------------------------------------------------------------------------

const std::vector<Criterion>& registry() {
  static const std::vector<Criterion> criteria = {
      {1, "linear bridge matches closed-form conditioned moments",
       criterion_ou_bridge_exactness},
      {2, "zero drift degenerates MH acceptance to one", criterion_degenerate_acceptance},
      {3, "saturating-reaction chain acceptance in band", criterion_mm_acceptance},
      {4, "cubic-reaction chain acceptance in band", criterion_ac_acceptance},
      {5, "rejection-survivor counts at reference windows", criterion_rejection_counts},
      {6, "chain and rejection mean paths agree on dominant modes",
       criterion_bridge_vs_rejection},
      {7, "pseudo-marginal chain targets the endpoint law", criterion_cpm_target},
      {8, "endpoint-rate diagnostic stable under refinement", criterion_rate_refinement},
      {9, "inverse observed covariance blows up linearly", criterion_blowup_rate},
      {10, "structural invariants", criterion_structural},
  };
  return criteria;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--list") == 0) {
      for (const Criterion& c : registry())
        std::cout << c.id << "  " << c.name << "\n";
      return 0;
    }
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    }
  }

  int failures = 0;
  for (const Criterion& criterion : registry()) {
    if (only != 0 && criterion.id != only) continue;
    const CriterionResult result = criterion.run();
    std::cout << (result.pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion.id
              << ": " << criterion.name << "\n";
    for (const std::string& line : result.details) std::cout << "       " << line << "\n";
    if (!result.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
