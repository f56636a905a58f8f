#include "spdebridge/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

namespace spdebridge {

Nonlinearity::Nonlinearity(Kind kind, std::shared_ptr<const PhysicalGrid> grid)
    : kind_(kind), grid_(std::move(grid)) {}

Nonlinearity Nonlinearity::zero() { return Nonlinearity(Kind::kZero, nullptr); }

Nonlinearity Nonlinearity::michaelis_menten(double zeta1, double zeta2,
                                            std::shared_ptr<const PhysicalGrid> grid) {
  if (!(zeta1 > 0.0) || !(zeta2 > 0.0))
    throw std::invalid_argument("reaction parameters zeta1, zeta2 must be positive");
  if (!grid) throw std::invalid_argument("pointwise nonlinearity needs a physical grid");
  Nonlinearity f(Kind::kMichaelisMenten, std::move(grid));
  f.zeta1_ = zeta1;
  f.zeta2_ = zeta2;
  return f;
}

Nonlinearity Nonlinearity::allen_cahn(double zeta, std::shared_ptr<const PhysicalGrid> grid) {
  if (!(zeta > 0.0)) throw std::invalid_argument("reaction rate zeta must be positive");
  if (!grid) throw std::invalid_argument("pointwise nonlinearity needs a physical grid");
  Nonlinearity f(Kind::kAllenCahn, std::move(grid));
  f.zeta_ = zeta;
  return f;
}

Nonlinearity Nonlinearity::amari(const AmariParams& params,
                                 std::shared_ptr<const PhysicalGrid> grid) {
  if (!(params.amp_excite > 0.0) || !(params.amp_inhibit > 0.0) ||
      !(params.width_excite > 0.0) || !(params.width_inhibit > 0.0) ||
      !(params.slope > 0.0))
    throw std::invalid_argument("kernel amplitudes, widths and slope must be positive");
  if (!grid) throw std::invalid_argument("neural-field nonlinearity needs a physical grid");
  Nonlinearity f(Kind::kAmari, std::move(grid));
  f.amari_ = params;
  const auto& g = *f.grid_;
  const Eigen::Index m_count = g.num_points();
  f.kernel_.resize(m_count, m_count);
  const double w = g.quadrature_weight();
  for (Eigen::Index i = 0; i < m_count; ++i) {
    for (Eigen::Index j = 0; j < m_count; ++j) {
      const double d = g.points()[i] - g.points()[j];
      const double d2 = d * d;
      const double kernel_value =
          params.amp_excite * std::exp(-d2 / (2.0 * params.width_excite * params.width_excite)) -
          params.amp_inhibit * std::exp(-d2 / (2.0 * params.width_inhibit * params.width_inhibit));
      f.kernel_(i, j) = w * kernel_value;
    }
  }
  return f;
}

Eigen::MatrixXd Nonlinearity::pointwise(const Eigen::MatrixXd& field) const {
  switch (kind_) {
    case Kind::kMichaelisMenten: {
      const auto squared = field.array().square();
      return (zeta1_ * squared / (1.0 + zeta2_ * squared)).matrix();
    }
    case Kind::kAllenCahn:
      return (zeta_ * (field.array() - field.array().cube())).matrix();
    case Kind::kAmari: {
      // s(u - theta) with the logistic activation, then the kernel integral.
      const auto shifted = (field.array() - amari_.threshold) * amari_.slope;
      const Eigen::MatrixXd activated = (1.0 / (1.0 + (-shifted).exp())).matrix();
      return kernel_ * activated;
    }
    case Kind::kZero:
      break;
  }
  return Eigen::MatrixXd::Zero(field.rows(), field.cols());
}

Eigen::VectorXd Nonlinearity::eval_spectral(double /*t*/, const Eigen::VectorXd& x_spec) const {
  if (kind_ == Kind::kZero) return Eigen::VectorXd::Zero(x_spec.size());
  return grid_->to_spectral(pointwise(grid_->to_physical(x_spec)));
}

Eigen::MatrixXd Nonlinearity::eval_spectral_cols(double /*t*/,
                                                 const Eigen::MatrixXd& x_cols) const {
  if (kind_ == Kind::kZero) return Eigen::MatrixXd::Zero(x_cols.rows(), x_cols.cols());
  return grid_->to_spectral_cols(pointwise(grid_->to_physical_cols(x_cols)));
}

std::optional<double> Nonlinearity::pointwise_bound() const {
  switch (kind_) {
    case Kind::kZero:
      return 0.0;
    case Kind::kMichaelisMenten:
      // sup of z1 x^2 / (1 + z2 x^2) over the real line is z1 / z2.
      return zeta1_ / zeta2_ * std::sqrt(grid_->domain_length());
    case Kind::kAllenCahn:
      return std::nullopt;
    case Kind::kAmari: {
      // Activation is bounded by 1; the operator norm is bounded by the
      // Hilbert-Schmidt norm of the kernel, which the quadrature matrix
      // approximates by its Frobenius norm.
      return kernel_.norm() * std::sqrt(grid_->domain_length());
    }
  }
  return std::nullopt;
}

const Eigen::MatrixXd& Nonlinearity::amari_kernel_matrix() const {
  if (kind_ != Kind::kAmari)
    throw std::logic_error("kernel matrix is only defined for the neural-field kind");
  return kernel_;
}

const AmariParams& Nonlinearity::amari_params() const {
  if (kind_ != Kind::kAmari)
    throw std::logic_error("kernel parameters are only defined for the neural-field kind");
  return amari_;
}

}  // namespace spdebridge
