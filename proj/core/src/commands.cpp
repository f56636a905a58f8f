#include "spdebridge/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <vector>

#include <json.hpp>

#include "spdebridge/config.hpp"
#include "spdebridge/csv.hpp"
#include "spdebridge/errors.hpp"
#include "spdebridge/oracles.hpp"
#include "spdebridge/version.hpp"

namespace spdebridge {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class WallClock {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int run_protected(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const FactorizationError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumericalFailure;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitFailure;
  }
}

ordered_json quantile_summary(std::vector<double> values) {
  ordered_json out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  out["min"] = at(0.0);
  out["q25"] = at(0.25);
  out["median"] = at(0.5);
  out["q75"] = at(0.75);
  out["max"] = at(1.0);
  return out;
}

ordered_json base_manifest(const ExperimentSetup& setup, const std::string& command) {
  ordered_json manifest;
  manifest["artifact"] = {{"name", "spdebridge"},
                          {"version", kVersion},
                          {"stream_derivation", kStreamDerivationRule}};
  manifest["command"] = command;
  manifest["seed"] = setup.seed;
  ordered_json config_echo;
  for (const auto& [key, value] : setup.resolved) config_echo[key] = value;
  manifest["config"] = config_echo;
  manifest["steps"] = {{"modes", setup.model.num_modes()},
                       {"grid_points", setup.grid->num_points()},
                       {"time_steps", setup.time.num_steps()},
                       {"dt", setup.time.dt()}};
  const TraceDiagnostic trace = setup.model.trace_diagnostic();
  manifest["model_diagnostics"] = {
      {"noise_over_drift_partial_sum", trace.partial_sums[trace.partial_sums.size() - 1]},
      {"noise_over_drift_tail_exponent", trace.tail_exponent}};
  return manifest;
}

void write_manifest(const std::string& path, const ordered_json& manifest) {
  write_text_atomic(path, manifest.dump(2) + "\n");
}

Eigen::MatrixXd path_table(const TimeGrid& grid, const Eigen::MatrixXd& path) {
  Eigen::MatrixXd table(path.cols(), path.rows() + 1);
  for (Eigen::Index n = 0; n < path.cols(); ++n) {
    table(n, 0) = grid.node(static_cast<int>(n));
    table.row(n).tail(path.rows()) = path.col(n).transpose();
  }
  return table;
}

void write_path_files(const ExperimentSetup& setup, const Eigen::MatrixXd& path,
                      const std::string& dir) {
  write_csv(dir + "/path_spectral.csv", spectral_header(path.rows()),
            path_table(setup.time, path));
  const Eigen::MatrixXd field = setup.grid->to_physical_cols(path);
  write_csv(dir + "/field.csv", field_header(field.rows()), path_table(setup.time, field));
}

/// Logarithmic lag grid for the blow-up diagnostic, clipped to the horizon.
std::vector<double> default_lag_grid(double horizon) {
  const double hi = std::min(0.1, 0.999 * horizon);
  const double lo = 1e-4;
  std::vector<double> lags;
  if (!(hi / lo >= 100.0)) return lags;  // needs two decades
  const int count = 17;
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    lags.push_back(lo * std::pow(hi / lo, f));
  }
  return lags;
}

ordered_json observation_diagnostics(const ExperimentSetup& setup, bool quiet) {
  ordered_json out;
  if (!setup.observation.has_value()) return out;
  const std::vector<double> lags = default_lag_grid(setup.time.horizon());
  if (lags.empty()) {
    out["status"] = "skipped (horizon too short for a two-decade lag grid)";
    return out;
  }
  try {
    const BlowupRateReport report =
        blowup_rate_diagnostic(*setup.observation, setup.model, lags);
    out["p_hat"] = report.p_hat;
    out["c_lower"] = report.c_lower;
    out["c_upper"] = report.c_upper;
    if (std::abs(report.p_hat - 1.0) > 0.15 && !quiet) {
      std::cerr << "warning: inverse observed covariance grows like lag^-" << report.p_hat
                << " (expected an exponent near 1); endpoint steering may be off-rate\n";
    }
  } catch (const FactorizationError& err) {
    out["status"] = std::string("unavailable: ") + err.what();
  }
  return out;
}

void warn_unbounded_drift(const ExperimentSetup& setup, bool quiet) {
  if (quiet) return;
  if (setup.drift.kind() == Nonlinearity::Kind::kAllenCahn) {
    std::cerr << "note: the cubic drift is unbounded, so bounded-drift weight "
                 "diagnostics do not apply to this run\n";
  }
}

struct ValidateCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string details;
};

// ---------------------------------------------------------------------------
// validate checks
// ---------------------------------------------------------------------------

ValidateCheck check_transform_round_trip(const ExperimentSetup& setup) {
  ValidateCheck check{.name = "transform_round_trip"};
  const Eigen::Index j_count = setup.grid->num_modes();
  const RngStream rng(setup.seed, derive_stream(0, StreamRole::kGeneric, 1));
  const Eigen::VectorXd coeffs = rng.normal_vector(j_count);
  const Eigen::VectorXd back = setup.grid->to_spectral(setup.grid->to_physical(coeffs));
  check.measured = (back - coeffs).norm() / coeffs.norm();
  check.tolerance = 1e-8;
  check.pass = check.measured < check.tolerance;
  return check;
}

ValidateCheck check_covariance_flow(const ExperimentSetup& setup) {
  ValidateCheck check{.name = "covariance_flow"};
  double worst = 0.0;
  const RngStream rng(setup.seed, derive_stream(0, StreamRole::kGeneric, 2));
  for (int trial = 0; trial < 8; ++trial) {
    const double s = 0.05 + 0.5 * rng.uniform(2 * trial);
    const double t = 0.05 + 0.5 * rng.uniform(2 * trial + 1);
    const Eigen::VectorXd lhs = setup.model.covariance_eigs(s + t);
    const Eigen::VectorXd rhs =
        setup.model.covariance_eigs(t).array() +
        (-2.0 * t * setup.model.drift_eigs().array()).exp() *
            setup.model.covariance_eigs(s).array();
    const double scale = lhs.cwiseAbs().maxCoeff();
    if (scale > 0.0) worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
  }
  check.measured = worst;
  check.tolerance = 1e-12;
  check.pass = check.measured < check.tolerance;
  return check;
}

ValidateCheck check_semigroup_composition(const ExperimentSetup& setup) {
  ValidateCheck check{.name = "semigroup_composition"};
  const double s = 0.31, t = 0.47;
  const Eigen::VectorXd lhs = setup.model.semigroup_factors(s + t);
  const Eigen::VectorXd rhs = setup.model.semigroup_factors(s).cwiseProduct(
      setup.model.semigroup_factors(t));
  check.measured = (lhs - rhs).cwiseAbs().maxCoeff();
  check.tolerance = 1e-14;
  check.pass = check.measured < check.tolerance;
  return check;
}

// Conditioned scalar moments vs a direct bivariate sampling oracle.
ValidateCheck check_bridge_moments_oracle(const ExperimentSetup& setup) {
  ValidateCheck check{.name = "bridge_moments_vs_bivariate_oracle"};
  const double a = 1.0, q = 1.0, horizon = 1.0, t = 0.5, x0 = 0.0, y = 1.0;
  const SpectralModel scalar(Eigen::VectorXd::Constant(1, a),
                             Eigen::VectorXd::Constant(1, q), setup.model.domain_length());
  const TimeGrid grid(horizon, 2);
  const OuBridgeMoments moments =
      ou_bridge_moments(scalar, Nonlinearity::zero(),
                        Observation::projection(1, 1),
                        Eigen::VectorXd::Constant(1, y),
                        Eigen::VectorXd::Constant(1, x0), grid);

  // Sample (state_t, state_T) pairs from the exact transition law and
  // condition by Gaussian regression on the empirical moments.
  const double var_t = scalar.covariance_eigs(t)[0];
  const double var_rem = scalar.covariance_eigs(horizon - t)[0];
  const double decay_t = std::exp(-a * t);
  const double decay_rem = std::exp(-a * (horizon - t));
  const RngStream rng(setup.seed, derive_stream(0, StreamRole::kGeneric, 3));
  const std::int64_t n = 1000000;
  double sum_mid = 0, sum_end = 0, sum_mid2 = 0, sum_end2 = 0, sum_cross = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double mid = decay_t * x0 + std::sqrt(var_t) * rng.normal(2 * i);
    const double end = decay_rem * mid + std::sqrt(var_rem) * rng.normal(2 * i + 1);
    sum_mid += mid;
    sum_end += end;
    sum_mid2 += mid * mid;
    sum_end2 += end * end;
    sum_cross += mid * end;
  }
  const double mean_mid = sum_mid / n, mean_end = sum_end / n;
  const double v_mid = sum_mid2 / n - mean_mid * mean_mid;
  const double v_end = sum_end2 / n - mean_end * mean_end;
  const double cov = sum_cross / n - mean_mid * mean_end;
  const double oracle_mean = mean_mid + cov / v_end * (y - mean_end);
  const double oracle_var = v_mid - cov * cov / v_end;

  const double closed_mean = moments.mean(0, 1);
  const double closed_var = moments.variance(0, 1);
  check.measured = std::max(std::abs(closed_mean - oracle_mean),
                            std::abs(closed_var - oracle_var));
  check.tolerance = 2e-3;
  check.pass = check.measured < check.tolerance;
  check.details = "mean " + format_double(closed_mean) + " vs " + format_double(oracle_mean) +
                  ", variance " + format_double(closed_var) + " vs " +
                  format_double(oracle_var);
  return check;
}

// Guided simulation with zero drift against the closed-form conditioned law.
ValidateCheck check_guided_vs_analytic(const ExperimentSetup& setup) {
  ValidateCheck check{.name = "guided_vs_analytic_moments"};
  const Eigen::Index j_count = 16;
  const Eigen::Index k = 4;
  const SpectralModel model(make_dirichlet_laplacian(3e-3, static_cast<int>(j_count)),
                            make_white_noise(1.0, static_cast<int>(j_count)),
                            setup.model.domain_length());
  const TimeGrid grid(1.0, 200);
  const Observation obs = Observation::projection(k, j_count);
  Eigen::VectorXd y(k);
  y << 0.7, -0.4, 0.2, 0.5;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(j_count);
  const Nonlinearity drift = Nonlinearity::zero();
  const LagTable lags(obs, model, grid);
  const OuBridgeMoments moments = ou_bridge_moments(model, drift, obs, y, x0, grid);

  const int n_paths = 400;
  const int node = 100;  // midpoint
  Eigen::MatrixXd mids(k, n_paths);
  for (int p = 0; p < n_paths; ++p) {
    const NoiseDraft noise = NoiseDraft::standard(
        j_count, grid.num_steps(), setup.seed,
        derive_stream(1, StreamRole::kForwardDraw, static_cast<std::uint64_t>(p)));
    const GuidedRun run = solve_guided(model, drift, lags, y, x0, grid, noise);
    mids.col(p) = run.path.col(node).head(k);
  }
  double worst_sigma = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double mean = mids.row(j).mean();
    const double var = (mids.row(j).array() - mean).square().sum() / (n_paths - 1);
    const double true_mean = moments.mean(j, node);
    const double true_var = moments.variance(j, node);
    const double se_mean = std::sqrt(true_var / n_paths);
    const double se_var = true_var * std::sqrt(2.0 / (n_paths - 1));
    worst_sigma = std::max(worst_sigma, std::abs(mean - true_mean) / se_mean);
    worst_sigma = std::max(worst_sigma, std::abs(var - true_var) / se_var);
  }
  check.measured = worst_sigma;
  check.tolerance = 4.0;  // in combined standard errors
  check.pass = check.measured < check.tolerance;
  return check;
}

ValidateCheck check_lambda_bound(const ExperimentSetup&) {
  ValidateCheck check{.name = "lambda_bound_shape"};
  double worst = std::abs(lambda_bound(0.7, 0.0) - 1.0);
  double previous = 1.0;
  for (double lag : {0.1, 0.2, 0.5, 1.0, 2.0}) {
    const double value = lambda_bound(0.7, lag);
    if (value < previous) worst = std::max(worst, previous - value);
    previous = value;
  }
  check.measured = worst;
  check.tolerance = 1e-12;
  check.pass = check.measured < check.tolerance;
  return check;
}

ValidateCheck check_blowup_rate(const ExperimentSetup& setup) {
  ValidateCheck check{.name = "observed_covariance_blowup_rate"};
  const std::vector<double> lags = default_lag_grid(setup.time.horizon());
  if (!setup.observation.has_value() || lags.empty()) {
    check.pass = true;
    check.details = "skipped (no observation section or horizon too short)";
    return check;
  }
  const BlowupRateReport report =
      blowup_rate_diagnostic(*setup.observation, setup.model, lags);
  check.measured = report.p_hat;
  check.tolerance = 0.15;  // allowed deviation of the exponent from 1
  check.pass = std::abs(report.p_hat - 1.0) <= check.tolerance;
  check.details = "envelope [" + format_double(report.c_lower) + ", " +
                  format_double(report.c_upper) + "]";
  return check;
}

ValidateCheck check_amari_quadrature(const ExperimentSetup& setup) {
  ValidateCheck check{.name = "kernel_quadrature_refinement"};
  if (setup.drift.kind() != Nonlinearity::Kind::kAmari) {
    check.pass = true;
    check.details = "skipped (nonlinearity is not the neural-field kind)";
    return check;
  }
  const Eigen::Index j_count = setup.grid->num_modes();
  auto refined = std::make_shared<const PhysicalGrid>(
      j_count, setup.grid->domain_length(), 4 * setup.grid->num_points());
  const Nonlinearity fine = Nonlinearity::amari(setup.drift.amari_params(), refined);
  const RngStream rng(setup.seed, derive_stream(0, StreamRole::kGeneric, 4));
  const Eigen::VectorXd x = rng.normal_vector(j_count);
  const Eigen::VectorXd coarse_out = setup.drift.eval_spectral(0.0, x);
  const Eigen::VectorXd fine_out = fine.eval_spectral(0.0, x);
  check.measured = (coarse_out - fine_out).norm() / std::max(1e-30, fine_out.norm());
  check.tolerance = 1e-4;
  check.pass = check.measured < check.tolerance;
  return check;
}

}  // namespace

int cmd_forward(const CliOptions& options) {
  return run_protected([&] {
    const WallClock clock;
    ExperimentSetup setup = load_experiment(ConfigMap::parse_file(options.config_path), {},
                                            options.seed, options.out_dir);
    warn_unbounded_drift(setup, options.quiet);
    fs::create_directories(setup.output_dir);

    const NoiseDraft noise =
        NoiseDraft::standard(setup.model.num_modes(), setup.time.num_steps(), setup.seed,
                             derive_stream(0, StreamRole::kNoiseInit));
    const Eigen::MatrixXd path =
        solve_forward(setup.model, setup.drift, setup.x0, setup.time, noise);
    write_path_files(setup, path, setup.output_dir);

    ordered_json manifest = base_manifest(setup, "forward");
    if (setup.observation.has_value()) {
      const Eigen::VectorXd observed =
          setup.observation->observe(path.col(path.cols() - 1));
      write_csv(setup.output_dir + "/observed.csv", observed_header(observed.size()),
                observed.transpose());
      manifest["observed_endpoint"] = std::vector<double>(
          observed.data(), observed.data() + observed.size());
      manifest["observation_diagnostics"] = observation_diagnostics(setup, options.quiet);
    }
    manifest["results"] = {{"endpoint_norm", path.col(path.cols() - 1).norm()}};
    manifest["timing"] = {{"wall_ms", clock.elapsed_ms()}};
    write_manifest(setup.output_dir + "/manifest.json", manifest);

    if (!options.quiet) {
      std::cout << "forward: wrote " << setup.output_dir << "/path_spectral.csv, field.csv"
                << (setup.observation ? ", observed.csv" : "") << "\n";
    }
    return kExitOk;
  });
}

int cmd_guided(const CliOptions& options) {
  return run_protected([&] {
    const WallClock clock;
    ExperimentSetup setup = load_experiment(
        ConfigMap::parse_file(options.config_path),
        {.observation = true, .conditioning_state = true}, options.seed, options.out_dir);
    warn_unbounded_drift(setup, options.quiet);
    fs::create_directories(setup.output_dir);

    const LagTable lags(*setup.observation, setup.model, setup.time);
    const NoiseDraft noise =
        NoiseDraft::standard(setup.model.num_modes(), setup.time.num_steps(), setup.seed,
                             derive_stream(0, StreamRole::kNoiseInit));
    const GuidedRun run =
        solve_guided(setup.model, setup.drift, lags, *setup.y, setup.x0, setup.time, noise);
    write_path_files(setup, run.path, setup.output_dir);

    if (!options.quiet && std::abs(run.log_psi) > 1e5) {
      std::cerr << "warning: |log path weight| = " << std::abs(run.log_psi)
                << "; the conditioning state may be far from the reachable set\n";
    }

    ordered_json manifest = base_manifest(setup, "guided");
    manifest["results"] = {{"log_psi", run.log_psi},
                           {"endpoint_gap", run.endpoint_gap},
                           {"rate_sup", run.rate_sup},
                           {"rate_sup_tail", rate_diagnostic(run)}};
    manifest["observation_diagnostics"] = observation_diagnostics(setup, options.quiet);
    manifest["timing"] = {{"wall_ms", clock.elapsed_ms()}};
    write_manifest(setup.output_dir + "/manifest.json", manifest);

    if (!options.quiet) {
      std::cout << "guided: log_psi " << format_double(run.log_psi) << ", endpoint gap "
                << format_double(run.endpoint_gap) << "\n";
    }
    return kExitOk;
  });
}

int cmd_bridge_mh(const CliOptions& options) {
  return run_protected([&] {
    const WallClock clock;
    ExperimentSetup setup = load_experiment(
        ConfigMap::parse_file(options.config_path),
        {.observation = true, .conditioning_state = true, .mh_sampler = true},
        options.seed, options.out_dir);
    warn_unbounded_drift(setup, options.quiet);
    fs::create_directories(setup.output_dir);

    const MhReport report = mh_bridge(setup.model, setup.drift, *setup.observation,
                                      *setup.y, setup.x0, setup.time, *setup.mh);

    Eigen::MatrixXd trace(static_cast<Eigen::Index>(report.trace.size()), 3);
    for (size_t i = 0; i < report.trace.size(); ++i) {
      trace(static_cast<Eigen::Index>(i), 0) = static_cast<double>(report.trace[i].iteration);
      trace(static_cast<Eigen::Index>(i), 1) = report.trace[i].log_psi_current;
      trace(static_cast<Eigen::Index>(i), 2) = report.trace[i].accepted ? 1.0 : 0.0;
    }
    write_csv(setup.output_dir + "/trace.csv", {"iteration", "log_psi", "accepted"}, trace);

    fs::create_directories(setup.output_dir + "/samples");
    char name[32];
    std::vector<double> gaps, rates;
    Eigen::MatrixXd mean_path = Eigen::MatrixXd::Zero(setup.model.num_modes(),
                                                      setup.time.num_steps() + 1);
    for (size_t s = 0; s < report.samples.size(); ++s) {
      std::snprintf(name, sizeof(name), "/samples/sample_%04zu.csv", s);
      write_csv(setup.output_dir + name, spectral_header(setup.model.num_modes()),
                path_table(setup.time, report.samples[s].path));
      gaps.push_back(report.samples[s].endpoint_gap);
      rates.push_back(report.samples[s].rate_sup);
      mean_path += report.samples[s].path;
    }
    if (!report.samples.empty()) {
      mean_path /= static_cast<double>(report.samples.size());
      const Eigen::MatrixXd mean_field = setup.grid->to_physical_cols(mean_path);
      write_csv(setup.output_dir + "/mean_field.csv", field_header(mean_field.rows()),
                path_table(setup.time, mean_field));
    }

    ordered_json manifest = base_manifest(setup, "bridge-mh");
    manifest["results"] = {
        {"acceptance_rate", report.acceptance_rate},
        {"retained_samples", report.samples.size()},
        {"endpoint_gap", quantile_summary(gaps)},
        {"rate_sup", quantile_summary(rates)},
    };
    manifest["observation_diagnostics"] = observation_diagnostics(setup, options.quiet);
    manifest["timing"] = {{"wall_ms", clock.elapsed_ms()}};
    write_manifest(setup.output_dir + "/manifest.json", manifest);

    if (!options.quiet) {
      std::cout << "bridge-mh: acceptance rate "
                << format_double(report.acceptance_rate) << " over "
                << setup.mh->iterations << " iterations, retained "
                << report.samples.size() << " samples\n";
    }
    return kExitOk;
  });
}

int cmd_density_cpm(const CliOptions& options) {
  return run_protected([&] {
    const WallClock clock;
    ExperimentSetup setup = load_experiment(
        ConfigMap::parse_file(options.config_path),
        {.observation = true, .cpm_sampler = true}, options.seed, options.out_dir);
    warn_unbounded_drift(setup, options.quiet);
    fs::create_directories(setup.output_dir);

    const CpmReport report = cpm_density(setup.model, setup.drift, *setup.observation,
                                         setup.x0, setup.time, *setup.cpm);

    const Eigen::Index k = setup.observation->dim();
    Eigen::MatrixXd samples(report.samples.cols(), k + 1);
    for (Eigen::Index i = 0; i < report.samples.cols(); ++i) {
      samples(i, 0) = static_cast<double>(i);
      samples.row(i).tail(k) = report.samples.col(i).transpose();
    }
    std::vector<std::string> header = {"iteration"};
    for (const std::string& h : observed_header(k)) header.push_back(h);
    write_csv(setup.output_dir + "/samples_y.csv", header, samples);

    Eigen::MatrixXd trace(static_cast<Eigen::Index>(report.trace.size()), 3);
    for (size_t i = 0; i < report.trace.size(); ++i) {
      trace(static_cast<Eigen::Index>(i), 0) = static_cast<double>(report.trace[i].iteration);
      trace(static_cast<Eigen::Index>(i), 1) = report.trace[i].log_pi_current;
      trace(static_cast<Eigen::Index>(i), 2) = report.trace[i].accepted ? 1.0 : 0.0;
    }
    write_csv(setup.output_dir + "/trace.csv", {"iteration", "log_pi_hat", "accepted"},
              trace);

    // Post-burn-in moments as a convenience summary; the sample table is the
    // real output.
    const Eigen::Index burn = report.samples.cols() / 2;
    const Eigen::MatrixXd tail =
        report.samples.rightCols(report.samples.cols() - burn);
    ordered_json moments;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double mean = tail.row(j).mean();
      const double var =
          (tail.row(j).array() - mean).square().sum() / (tail.cols() - 1);
      moments.push_back({{"mean", mean}, {"variance", var}});
    }

    ordered_json manifest = base_manifest(setup, "density-cpm");
    manifest["results"] = {{"acceptance_rate", report.acceptance_rate},
                           {"post_burn_in_moments", moments}};
    manifest["observation_diagnostics"] = observation_diagnostics(setup, options.quiet);
    manifest["timing"] = {{"wall_ms", clock.elapsed_ms()}};
    write_manifest(setup.output_dir + "/manifest.json", manifest);

    if (!options.quiet) {
      std::cout << "density-cpm: acceptance rate "
                << format_double(report.acceptance_rate) << " over "
                << setup.cpm->iterations << " iterations\n";
    }
    return kExitOk;
  });
}

int cmd_validate(const CliOptions& options) {
  return run_protected([&] {
    const WallClock clock;
    ExperimentSetup setup = load_experiment(ConfigMap::parse_file(options.config_path), {},
                                            options.seed, options.out_dir);
    fs::create_directories(setup.output_dir);

    // A check that throws is a failing entry, never a process failure.
    const auto guarded = [&](const char* name,
                             ValidateCheck (*check)(const ExperimentSetup&)) {
      try {
        return check(setup);
      } catch (const std::exception& err) {
        ValidateCheck failed;
        failed.name = name;
        failed.pass = false;
        failed.details = err.what();
        return failed;
      }
    };
    std::vector<ValidateCheck> checks;
    checks.push_back(guarded("transform_round_trip", check_transform_round_trip));
    checks.push_back(guarded("covariance_flow", check_covariance_flow));
    checks.push_back(guarded("semigroup_composition", check_semigroup_composition));
    checks.push_back(
        guarded("bridge_moments_vs_bivariate_oracle", check_bridge_moments_oracle));
    checks.push_back(guarded("guided_vs_analytic_moments", check_guided_vs_analytic));
    checks.push_back(guarded("lambda_bound_shape", check_lambda_bound));
    checks.push_back(
        guarded("observed_covariance_blowup_rate", check_blowup_rate));
    checks.push_back(guarded("kernel_quadrature_refinement", check_amari_quadrature));

    int failures = 0;
    ordered_json entries = ordered_json::array();
    for (const ValidateCheck& check : checks) {
      if (!check.pass) ++failures;
      ordered_json entry = {{"name", check.name},
                            {"pass", check.pass},
                            {"measured", check.measured},
                            {"tolerance", check.tolerance}};
      if (!check.details.empty()) entry["details"] = check.details;
      entries.push_back(entry);
      if (!options.quiet) {
        std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << " (measured "
                  << format_double(check.measured) << ", tolerance "
                  << format_double(check.tolerance) << ")\n";
      }
    }

    ordered_json manifest = base_manifest(setup, "validate");
    manifest["checks"] = entries;
    manifest["failures"] = failures;
    manifest["timing"] = {{"wall_ms", clock.elapsed_ms()}};
    write_manifest(setup.output_dir + "/validate_report.json", manifest);

    return failures == 0 ? kExitOk : kExitValidationFailures;
  });
}

}  // namespace spdebridge
