#pragma once

#include <Eigen/Core>

namespace spdebridge {

/// Diagnostics for the mode-truncation quality of a model: running partial
/// sums of q_j / a_j and a tail-decay exponent fitted on the upper half of
/// the spectrum. Advisory only; a slowly saturating sum means the retained
/// mode count under-resolves the noise.
struct TraceDiagnostic {
  Eigen::VectorXd partial_sums;  // cumulative q_j / a_j, j = 1..J
  double tail_exponent = 0.0;    // s in q_j/a_j ~ j^{-s}, least squares on log-log
};

/// A drift/noise operator pair that shares the sine eigenbasis: drift mode j
/// decays at rate a_j > 0 and receives independent noise with variance rate
/// q_j >= 0. Everything downstream (semigroup action, time-integrated
/// covariance, observation algebra) is derived from these two sequences.
///
/// Immutable after construction; safe to share across threads.
class SpectralModel {
 public:
  SpectralModel(Eigen::VectorXd drift_eigs, Eigen::VectorXd noise_eigs,
                double domain_length);

  Eigen::Index num_modes() const noexcept { return drift_eigs_.size(); }
  const Eigen::VectorXd& drift_eigs() const noexcept { return drift_eigs_; }
  const Eigen::VectorXd& noise_eigs() const noexcept { return noise_eigs_; }
  double domain_length() const noexcept { return domain_length_; }

  /// Marginal variance per mode accumulated over [0, t]:
  /// q_j(t) = q_j / (2 a_j) * (1 - exp(-2 a_j t)).
  Eigen::VectorXd covariance_eigs(double t) const;

  /// exp(-a_j t) per mode; all ones at t = 0.
  Eigen::VectorXd semigroup_factors(double t) const;

  TraceDiagnostic trace_diagnostic() const;

 private:
  Eigen::VectorXd drift_eigs_;
  Eigen::VectorXd noise_eigs_;
  double domain_length_;
};

/// a_j = eta * j^2 (second-derivative operator with zero boundary values).
Eigen::VectorXd make_dirichlet_laplacian(double eta, int num_modes);

/// a_j = eta for all j (uniform damping).
Eigen::VectorXd make_damping(double eta, int num_modes);

/// q_j = sigma0^2.
Eigen::VectorXd make_white_noise(double sigma0, int num_modes);

/// q_j = sigma0^2 * j^{-decay}.
Eigen::VectorXd make_power_law_noise(double sigma0, double decay, int num_modes);

/// q_j = sigma0^2 * (rho^{-2} + (2 pi j)^2)^{-(1/2 + nu)}.
Eigen::VectorXd make_matern_noise(double sigma0, double rho, double nu, int num_modes);

/// Dense transform pair between spectral coefficients (length J) and field
/// values on M uniformly spaced interior points of (0, domain_length).
///
/// The basis is the orthonormal sine family b_j(x) = sqrt(2/L) sin(j pi x/L).
/// On this point set the discrete sine system is orthogonal, so the analysis
/// map is an exact left inverse of the synthesis map whenever M >= J.
class PhysicalGrid {
 public:
  PhysicalGrid(Eigen::Index num_modes, double domain_length, Eigen::Index num_points);

  Eigen::Index num_modes() const noexcept { return synthesis_.cols(); }
  Eigen::Index num_points() const noexcept { return synthesis_.rows(); }
  double domain_length() const noexcept { return domain_length_; }
  const Eigen::VectorXd& points() const noexcept { return points_; }

  /// Quadrature weight per grid point: L / (M + 1).
  double quadrature_weight() const noexcept { return weight_; }

  Eigen::VectorXd to_physical(const Eigen::VectorXd& coeffs) const;
  Eigen::VectorXd to_spectral(const Eigen::VectorXd& values) const;

  /// Column-batched variants; every column is an independent state.
  Eigen::MatrixXd to_physical_cols(const Eigen::MatrixXd& coeff_cols) const;
  Eigen::MatrixXd to_spectral_cols(const Eigen::MatrixXd& value_cols) const;

  const Eigen::MatrixXd& synthesis_matrix() const noexcept { return synthesis_; }
  const Eigen::MatrixXd& analysis_matrix() const noexcept { return analysis_; }

 private:
  double domain_length_;
  double weight_;
  Eigen::VectorXd points_;
  Eigen::MatrixXd synthesis_;  // M x J
  Eigen::MatrixXd analysis_;   // J x M
};

}  // namespace spdebridge
