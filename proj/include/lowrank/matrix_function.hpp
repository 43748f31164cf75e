#pragma once

#include <Eigen/Dense>

namespace lowrank {

/// A twice-differentiable function of a dense matrix variable, exposing the
/// Hessian both as a quadratic form and as a matrix-free product.
class MatrixFunction {
 public:
  virtual ~MatrixFunction() = default;

  virtual double value(const Eigen::MatrixXd& w) const = 0;
  virtual Eigen::MatrixXd gradient(const Eigen::MatrixXd& w) const = 0;

  /// [∇²f(w)](d, d).
  virtual double hess_quadratic(const Eigen::MatrixXd& w,
                                const Eigen::MatrixXd& d) const = 0;

  /// Matrix H(d) with <H(d), e> = [∇²f(w)](d, e) for all e.
  virtual Eigen::MatrixXd hess_vec(const Eigen::MatrixXd& w,
                                   const Eigen::MatrixXd& d) const = 0;

  /// Bilinear form with one argument fixed, via the matrix-free product.
  double hess_bilinear(const Eigen::MatrixXd& w, const Eigen::MatrixXd& d,
                       const Eigen::MatrixXd& e) const {
    return hess_vec(w, d).cwiseProduct(e).sum();
  }
};

}  // namespace lowrank
