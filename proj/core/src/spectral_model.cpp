#include "spdebridge/spectral_model.hpp"

#include <cmath>
#include <stdexcept>

namespace spdebridge {

SpectralModel::SpectralModel(Eigen::VectorXd drift_eigs, Eigen::VectorXd noise_eigs,
                             double domain_length)
    : drift_eigs_(std::move(drift_eigs)),
      noise_eigs_(std::move(noise_eigs)),
      domain_length_(domain_length) {
  if (drift_eigs_.size() < 1) throw std::invalid_argument("model needs at least one mode");
  if (noise_eigs_.size() != drift_eigs_.size())
    throw std::invalid_argument("drift and noise eigenvalue counts differ");
  if (!(domain_length_ > 0.0)) throw std::invalid_argument("domain length must be positive");
  for (Eigen::Index j = 0; j < drift_eigs_.size(); ++j) {
    if (!(drift_eigs_[j] > 0.0) || !std::isfinite(drift_eigs_[j]))
      throw std::invalid_argument("drift eigenvalues must be positive and finite");
    if (!(noise_eigs_[j] >= 0.0) || !std::isfinite(noise_eigs_[j]))
      throw std::invalid_argument("noise eigenvalues must be nonnegative and finite");
  }
}

Eigen::VectorXd SpectralModel::covariance_eigs(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("covariance_eigs requires t >= 0");
  Eigen::VectorXd out(num_modes());
  for (Eigen::Index j = 0; j < num_modes(); ++j) {
    const double a = drift_eigs_[j];
    // -expm1 keeps accuracy when 2 a t is tiny.
    out[j] = noise_eigs_[j] / (2.0 * a) * (-std::expm1(-2.0 * a * t));
  }
  return out;
}

Eigen::VectorXd SpectralModel::semigroup_factors(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup_factors requires t >= 0");
  return (-t * drift_eigs_.array()).exp();
}

TraceDiagnostic SpectralModel::trace_diagnostic() const {
  TraceDiagnostic diag;
  const Eigen::Index j_count = num_modes();
  diag.partial_sums.resize(j_count);
  double running = 0.0;
  for (Eigen::Index j = 0; j < j_count; ++j) {
    running += noise_eigs_[j] / drift_eigs_[j];
    diag.partial_sums[j] = running;
  }
  // Fit log(q_j/a_j) ~ -s log j on the upper half of the retained spectrum.
  const Eigen::Index start = j_count / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  Eigen::Index n = 0;
  for (Eigen::Index j = start; j < j_count; ++j) {
    const double term = noise_eigs_[j] / drift_eigs_[j];
    if (!(term > 0.0)) continue;
    const double x = std::log(static_cast<double>(j + 1));
    const double y = std::log(term);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double denom = n * sxx - sx * sx;
  diag.tail_exponent = (n >= 2 && denom > 0.0) ? -(n * sxy - sx * sy) / denom : 0.0;
  return diag;
}

Eigen::VectorXd make_dirichlet_laplacian(double eta, int num_modes) {
  if (!(eta > 0.0)) throw std::invalid_argument("diffusivity eta must be positive");
  if (num_modes < 1) throw std::invalid_argument("mode count must be at least 1");
  Eigen::VectorXd a(num_modes);
  for (int j = 0; j < num_modes; ++j) {
    const double mode = static_cast<double>(j + 1);
    a[j] = eta * mode * mode;
  }
  return a;
}

Eigen::VectorXd make_damping(double eta, int num_modes) {
  if (!(eta > 0.0)) throw std::invalid_argument("damping rate eta must be positive");
  if (num_modes < 1) throw std::invalid_argument("mode count must be at least 1");
  return Eigen::VectorXd::Constant(num_modes, eta);
}

Eigen::VectorXd make_white_noise(double sigma0, int num_modes) {
  if (!(sigma0 >= 0.0)) throw std::invalid_argument("sigma0 must be nonnegative");
  if (num_modes < 1) throw std::invalid_argument("mode count must be at least 1");
  return Eigen::VectorXd::Constant(num_modes, sigma0 * sigma0);
}

Eigen::VectorXd make_power_law_noise(double sigma0, double decay, int num_modes) {
  if (!(sigma0 >= 0.0)) throw std::invalid_argument("sigma0 must be nonnegative");
  if (!(decay >= 0.0)) throw std::invalid_argument("decay exponent must be nonnegative");
  if (num_modes < 1) throw std::invalid_argument("mode count must be at least 1");
  Eigen::VectorXd q(num_modes);
  for (int j = 0; j < num_modes; ++j) {
    q[j] = sigma0 * sigma0 * std::pow(static_cast<double>(j + 1), -decay);
  }
  return q;
}

Eigen::VectorXd make_matern_noise(double sigma0, double rho, double nu, int num_modes) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (num_modes < 1) throw std::invalid_argument("mode count must be at least 1");
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  Eigen::VectorXd q(num_modes);
  const double inv_rho_sq = 1.0 / (rho * rho);
  for (int j = 0; j < num_modes; ++j) {
    const double wave = kTwoPi * (j + 1);
    q[j] = sigma0 * sigma0 * std::pow(inv_rho_sq + wave * wave, -(0.5 + nu));
  }
  return q;
}

PhysicalGrid::PhysicalGrid(Eigen::Index num_modes, double domain_length,
                           Eigen::Index num_points)
    : domain_length_(domain_length) {
  if (num_modes < 1) throw std::invalid_argument("grid needs at least one mode");
  if (!(domain_length > 0.0)) throw std::invalid_argument("domain length must be positive");
  if (num_points < num_modes)
    throw std::invalid_argument("grid needs at least as many points as modes");
  constexpr double kPi = 3.14159265358979323846264338328;
  weight_ = domain_length_ / static_cast<double>(num_points + 1);
  points_.resize(num_points);
  for (Eigen::Index m = 0; m < num_points; ++m) {
    points_[m] = domain_length_ * static_cast<double>(m + 1) /
                 static_cast<double>(num_points + 1);
  }
  const double scale = std::sqrt(2.0 / domain_length_);
  synthesis_.resize(num_points, num_modes);
  for (Eigen::Index m = 0; m < num_points; ++m) {
    for (Eigen::Index j = 0; j < num_modes; ++j) {
      synthesis_(m, j) = scale * std::sin((j + 1) * kPi * points_[m] / domain_length_);
    }
  }
  analysis_ = weight_ * synthesis_.transpose();
}

Eigen::VectorXd PhysicalGrid::to_physical(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != num_modes())
    throw std::invalid_argument("spectral coefficient count does not match the grid");
  return synthesis_ * coeffs;
}

Eigen::VectorXd PhysicalGrid::to_spectral(const Eigen::VectorXd& values) const {
  if (values.size() != num_points())
    throw std::invalid_argument("grid value count does not match the grid");
  return analysis_ * values;
}

Eigen::MatrixXd PhysicalGrid::to_physical_cols(const Eigen::MatrixXd& coeff_cols) const {
  if (coeff_cols.rows() != num_modes())
    throw std::invalid_argument("spectral coefficient count does not match the grid");
  return synthesis_ * coeff_cols;
}

Eigen::MatrixXd PhysicalGrid::to_spectral_cols(const Eigen::MatrixXd& value_cols) const {
  if (value_cols.rows() != num_points())
    throw std::invalid_argument("grid value count does not match the grid");
  return analysis_ * value_cols;
}

}  // namespace spdebridge
