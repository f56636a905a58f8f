#include "spdebridge/observation.hpp"

#include <cmath>
#include <stdexcept>

#include "spdebridge/errors.hpp"

namespace spdebridge {

namespace {

constexpr double kPivotRelTolerance = 1e-13;
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

// In-place lower Cholesky with a relative pivot floor. Returns false when a
// pivot drops below tol_rel * max diagonal entry.
bool cholesky_lower(Eigen::MatrixXd& a, double tol_rel) {
  const Eigen::Index n = a.rows();
  const double floor_value = tol_rel * a.diagonal().maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index p = 0; p < j; ++p) d -= a(j, p) * a(j, p);
    if (!(d > floor_value) || !std::isfinite(d)) return false;
    const double root = std::sqrt(d);
    a(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index p = 0; p < j; ++p) s -= a(i, p) * a(j, p);
      a(i, j) = s / root;
    }
  }
  a.triangularView<Eigen::StrictlyUpper>().setZero();
  return true;
}

}  // namespace

Observation::Observation(Eigen::MatrixXd coeffs, bool is_projection)
    : coeffs_(std::move(coeffs)), is_projection_(is_projection) {}

Observation Observation::projection(Eigen::Index k, Eigen::Index num_modes) {
  if (k < 1 || k > num_modes)
    throw std::invalid_argument("projection dimension must satisfy 1 <= k <= mode count");
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(k, num_modes);
  for (Eigen::Index i = 0; i < k; ++i) coeffs(i, i) = 1.0;
  return Observation(std::move(coeffs), true);
}

Observation Observation::weighted(Eigen::MatrixXd weight_coeffs) {
  if (weight_coeffs.rows() < 1 || weight_coeffs.rows() > weight_coeffs.cols())
    throw std::invalid_argument("weight rows must satisfy 1 <= k <= mode count");
  for (Eigen::Index i = 0; i < weight_coeffs.rows(); ++i) {
    if (weight_coeffs.row(i).norm() == 0.0)
      throw std::invalid_argument("weight rows must be nonzero");
  }
  return Observation(std::move(weight_coeffs), false);
}

Eigen::VectorXd Observation::observe(const Eigen::VectorXd& x) const {
  if (x.size() != num_modes())
    throw std::invalid_argument("state length does not match the observation");
  if (is_projection_) return x.head(dim());
  return coeffs_ * x;
}

Eigen::VectorXd ObservationAtLag::r_inv_apply(const Eigen::VectorXd& v) const {
  if (!factorized)
    throw FactorizationError(lag, "observed covariance was not factorized at this lag");
  Eigen::VectorXd u = chol_lower.triangularView<Eigen::Lower>().solve(v);
  chol_lower.triangularView<Eigen::Lower>().transpose().solveInPlace(u);
  return u;
}

double ObservationAtLag::gaussian_log_density(const Eigen::VectorXd& residual) const {
  if (!factorized)
    throw FactorizationError(lag, "observed covariance was not factorized at this lag");
  const Eigen::VectorXd whitened = chol_lower.triangularView<Eigen::Lower>().solve(residual);
  const double k = static_cast<double>(r_matrix.rows());
  return -0.5 * (k * kLogTwoPi + log_det_r + whitened.squaredNorm());
}

double ObservationAtLag::min_eigenvalue() const {
  if (!factorized)
    throw FactorizationError(lag, "observed covariance was not factorized at this lag");
  const Eigen::Index k = r_matrix.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
  double rayleigh = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd w = r_inv_apply(v);
    const double norm = w.norm();
    w /= norm;
    const double next = w.dot(r_inv_apply(w));
    const bool settled = it > 0 && std::abs(next - rayleigh) <= 1e-13 * std::abs(next);
    rayleigh = next;
    v = std::move(w);
    if (settled) break;
  }
  return 1.0 / rayleigh;
}

ObservationAtLag at_lag(const Observation& obs, const SpectralModel& model, double lag) {
  if (obs.num_modes() != model.num_modes())
    throw std::invalid_argument("observation and model mode counts differ");
  if (!(lag >= 0.0)) throw std::invalid_argument("lag must be nonnegative");

  ObservationAtLag out;
  out.lag = lag;
  const Eigen::VectorXd damp = model.semigroup_factors(lag);
  out.l_matrix = obs.coeffs() * damp.asDiagonal();
  const Eigen::VectorXd q = model.covariance_eigs(lag);
  out.r_matrix = obs.coeffs() * q.asDiagonal() * obs.coeffs().transpose();
  // Symmetrize away accumulation asymmetry before factorization.
  out.r_matrix = 0.5 * (out.r_matrix + out.r_matrix.transpose()).eval();

  if (lag == 0.0) {
    out.factorized = false;
    return out;
  }

  Eigen::MatrixXd factor = out.r_matrix;
  if (!cholesky_lower(factor, kPivotRelTolerance)) {
    throw FactorizationError(
        lag, "observed covariance is numerically singular at lag " + std::to_string(lag) +
                 " (lag too small for this precision, or rank-deficient weight rows)");
  }
  out.chol_lower = std::move(factor);
  out.log_det_r = 2.0 * out.chol_lower.diagonal().array().log().sum();
  out.factorized = true;
  return out;
}

BlowupRateReport blowup_rate_diagnostic(const Observation& obs, const SpectralModel& model,
                                           std::span<const double> lag_grid) {
  if (lag_grid.size() < 2)
    throw std::invalid_argument("lag grid needs at least two points");
  double lo = lag_grid[0], hi = lag_grid[0];
  for (double lag : lag_grid) {
    if (!(lag > 0.0)) throw std::invalid_argument("lag grid entries must be positive");
    lo = std::min(lo, lag);
    hi = std::max(hi, lag);
  }
  if (hi / lo < 100.0)
    throw std::invalid_argument("lag grid must span at least two decades");

  BlowupRateReport report;
  report.lags.assign(lag_grid.begin(), lag_grid.end());
  report.inv_norms.reserve(lag_grid.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double c_lo = 0, c_hi = 0;
  bool first = true;
  for (double lag : lag_grid) {
    const ObservationAtLag table = at_lag(obs, model, lag);
    const double inv_norm = 1.0 / table.min_eigenvalue();
    report.inv_norms.push_back(inv_norm);
    const double x = std::log(lag);
    const double y = std::log(inv_norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    const double envelope = lag * inv_norm;
    c_lo = first ? envelope : std::min(c_lo, envelope);
    c_hi = first ? envelope : std::max(c_hi, envelope);
    first = false;
  }
  const double n = static_cast<double>(lag_grid.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  report.p_hat = -slope;
  report.c_lower = c_lo;
  report.c_upper = c_hi;
  return report;
}

}  // namespace spdebridge
