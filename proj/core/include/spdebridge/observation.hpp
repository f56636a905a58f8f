#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "spdebridge/spectral_model.hpp"

namespace spdebridge {

/// A finite-rank linear observation of the state: either the projection onto
/// the first k spectral coordinates, or k weighted functionals whose rows are
/// the spectral coefficients of the weight functions. The projection case is
/// stored canonically as weight rows equal to standard basis vectors.
class Observation {
 public:
  static Observation projection(Eigen::Index k, Eigen::Index num_modes);
  static Observation weighted(Eigen::MatrixXd weight_coeffs);

  Eigen::Index dim() const noexcept { return coeffs_.rows(); }
  Eigen::Index num_modes() const noexcept { return coeffs_.cols(); }
  bool is_projection() const noexcept { return is_projection_; }
  const Eigen::MatrixXd& coeffs() const noexcept { return coeffs_; }

  /// y_i = sum_j coeffs(i, j) x_j.
  Eigen::VectorXd observe(const Eigen::VectorXd& x) const;

 private:
  Observation(Eigen::MatrixXd coeffs, bool is_projection);

  Eigen::MatrixXd coeffs_;  // k x J
  bool is_projection_;
};

/// The observation pushed through the model dynamics at a fixed lag D:
/// the damped observation matrix, the observed covariance with its Cholesky
/// factor, and the pieces of the Gaussian density built from them.
///
/// At lag 0 the covariance vanishes, so no factorization is produced and the
/// solve/density members must not be called.
struct ObservationAtLag {
  double lag = 0.0;
  Eigen::MatrixXd l_matrix;    // k x J: coeffs(i, j) * exp(-a_j * lag)
  Eigen::MatrixXd r_matrix;    // k x k: L Q_lag L^T
  Eigen::MatrixXd chol_lower;  // lower Cholesky factor of r_matrix
  double log_det_r = 0.0;
  bool factorized = false;

  /// Solves R u = v by two triangular solves.
  Eigen::VectorXd r_inv_apply(const Eigen::VectorXd& v) const;

  /// log N(residual; 0, R).
  double gaussian_log_density(const Eigen::VectorXd& residual) const;

  /// Smallest eigenvalue of R via inverse power iteration on the factor.
  double min_eigenvalue() const;
};

/// Builds the lag-D observation tables. Throws FactorizationError when a
/// Cholesky pivot falls below 1e-13 times the largest diagonal entry.
ObservationAtLag at_lag(const Observation& obs, const SpectralModel& model, double lag);

/// Least-squares scan of how the inverse observed covariance blows up as the
/// lag shrinks. p_hat near 1 means the blow-up is the linear rate the guiding
/// force needs; the envelope constants bound lag * ||R_lag^{-1}|| on the grid.
struct BlowupRateReport {
  double p_hat = 0.0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  std::vector<double> lags;
  std::vector<double> inv_norms;
};

/// Requires a grid of at least two lags spanning two decades.
BlowupRateReport blowup_rate_diagnostic(const Observation& obs, const SpectralModel& model,
                                           std::span<const double> lag_grid);

}  // namespace spdebridge
