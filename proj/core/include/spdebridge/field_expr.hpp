#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>

namespace spdebridge {

/// A closed-form expression in the spatial variable `xi`, for initial fields
/// given inline in config files, e.g. "0.5*sin(4*xi)".
///
/// Grammar: + - * / ^ with usual precedence, parentheses, unary minus, the
/// constant pi, and the one-argument functions sin cos tan exp log sqrt abs
/// sinh cosh tanh.
class FieldExpr {
 public:
  static FieldExpr parse(const std::string& text);  // throws std::invalid_argument

  double operator()(double xi) const;
  Eigen::VectorXd eval(const Eigen::VectorXd& points) const;

  struct Node;

 private:
  explicit FieldExpr(std::shared_ptr<const Node> root);
  std::shared_ptr<const Node> root_;
};

}  // namespace spdebridge
