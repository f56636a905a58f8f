#pragma once

#include <memory>
#include <optional>

#include <Eigen/Core>

#include "spdebridge/spectral_model.hpp"

namespace spdebridge {

/// Difference-of-Gaussians connectivity kernel plus the activation shape for
/// the neural-field drift.
struct AmariParams {
  double amp_excite = 1.0;     // amplitude of the excitatory Gaussian
  double amp_inhibit = 0.5;    // amplitude of the inhibitory Gaussian
  double width_excite = 0.4;   // std dev of the excitatory Gaussian
  double width_inhibit = 1.0;  // std dev of the inhibitory Gaussian
  double threshold = 0.0;      // activation threshold
  double slope = 5.0;          // logistic slope
};

/// Drift nonlinearity evaluated in spectral coordinates. Pointwise kinds go
/// through the physical grid (synthesize, apply the scalar map, analyze); the
/// neural-field kind additionally applies a precomputed kernel quadrature
/// matrix. Immutable and reentrant after construction.
class Nonlinearity {
 public:
  enum class Kind { kZero, kMichaelisMenten, kAllenCahn, kAmari };

  static Nonlinearity zero();
  static Nonlinearity michaelis_menten(double zeta1, double zeta2,
                                       std::shared_ptr<const PhysicalGrid> grid);
  static Nonlinearity allen_cahn(double zeta, std::shared_ptr<const PhysicalGrid> grid);
  static Nonlinearity amari(const AmariParams& params,
                            std::shared_ptr<const PhysicalGrid> grid);

  Kind kind() const noexcept { return kind_; }
  bool is_zero() const noexcept { return kind_ == Kind::kZero; }
  const std::shared_ptr<const PhysicalGrid>& grid() const noexcept { return grid_; }

  /// Drift contribution in spectral coordinates. The time argument is carried
  /// for signature stability; all kinds are autonomous.
  Eigen::VectorXd eval_spectral(double t, const Eigen::VectorXd& x_spec) const;

  /// Column-batched variant; every column is an independent state.
  Eigen::MatrixXd eval_spectral_cols(double t, const Eigen::MatrixXd& x_cols) const;

  /// Analytic bound on the Hilbert norm of the drift, when one exists.
  /// Bounded kinds return sup|f| * sqrt(domain length) (kernel-weighted for
  /// the neural-field kind); the cubic kind is unbounded and returns nothing.
  std::optional<double> pointwise_bound() const;

  /// Kernel quadrature matrix (neural-field kind only).
  const Eigen::MatrixXd& amari_kernel_matrix() const;
  const AmariParams& amari_params() const;

 private:
  Nonlinearity(Kind kind, std::shared_ptr<const PhysicalGrid> grid);

  Eigen::MatrixXd pointwise(const Eigen::MatrixXd& field) const;

  Kind kind_;
  std::shared_ptr<const PhysicalGrid> grid_;
  double zeta1_ = 0.0;
  double zeta2_ = 0.0;
  double zeta_ = 0.0;
  AmariParams amari_{};
  Eigen::MatrixXd kernel_;  // M x M, quadrature weight folded in
};

}  // namespace spdebridge
