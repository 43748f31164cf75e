#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "lowrank/factored.hpp"
#include "lowrank/matrix_function.hpp"
#include "lowrank/sensing.hpp"

namespace lowrank {

// ---------------------------------------------------------------------------
// Balance regularizer rho(W) = (mu/4) ||U^T U - V^T V||_F^2.

double regularizer_value(const FactoredPoint& w, double mu);
FactoredPoint regularizer_gradient(const FactoredPoint& w, double mu);
double regularizer_hess_quadratic(const FactoredPoint& w, const FactoredPoint& d,
                                  double mu);
FactoredPoint regularizer_hess_vec(const FactoredPoint& w, const FactoredPoint& d,
                                   double mu);

// ---------------------------------------------------------------------------
// Plugin objectives over the lifted n×m variable X.

/// Callback contract for a smooth objective f(X): value, matrix gradient,
/// Hessian bilinear form, and (optionally) the matrix-free Hessian product.
/// When hessian_apply is absent it is approximated by central differences
/// of the gradient.
struct LiftedObjective {
  std::function<double(const Eigen::MatrixXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> gradient;
  std::function<double(const Eigen::MatrixXd&, const Eigen::MatrixXd&,
                       const Eigen::MatrixXd&)>
      hessian_bilinear;  // (X, D, H)
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, const Eigen::MatrixXd&)>
      hessian_apply;  // optional
};

/// f(X) = 1/2 ||X - Xstar||_F^2.
LiftedObjective quadratic_loss(Eigen::MatrixXd xstar);

/// f(X) = 1/2 ||A(X) - y||^2.
LiftedObjective sensing_loss(std::shared_ptr<const MeasurementOperator> op,
                             Eigen::VectorXd y);

/// f(X) = 1/2 ||Omega ⊙ (X - Xstar)||_F^2 with positive weights.
LiftedObjective hadamard_weighted_loss(Eigen::MatrixXd omega, Eigen::MatrixXd xstar);

// ---------------------------------------------------------------------------
// Factored objectives over W = [U; V].

enum class ObjectiveKind { factorization, general, sensing, weighted_pca };

/// Uniform handle for a factored objective h(W) + rho(W), evaluated on the
/// stacked (n+m)×r variable.  Handles are immutable after construction and
/// reentrant.
class FactoredObjective : public MatrixFunction {
 public:
  /// g(W) = 1/2 ||U V^T - Xstar||_F^2 + rho(W), via closed forms.
  static FactoredObjective factorization(std::shared_ptr<const GroundTruth> gt,
                                         double mu);

  /// G(W) = f(U V^T) + rho(W) for a plugin f.
  static FactoredObjective general(LiftedObjective f, int n, int m, int r,
                                   double mu);

  /// Matrix sensing G(W) = 1/2 ||A(U V^T) - A(Xstar)||^2 + rho(W).
  static FactoredObjective sensing(std::shared_ptr<const GroundTruth> gt,
                                   std::shared_ptr<const MeasurementOperator> op,
                                   double mu);

  double value(const Eigen::MatrixXd& w) const override;
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& w) const override;
  double hess_quadratic(const Eigen::MatrixXd& w,
                        const Eigen::MatrixXd& d) const override;
  Eigen::MatrixXd hess_vec(const Eigen::MatrixXd& w,
                           const Eigen::MatrixXd& d) const override;

  double value(const FactoredPoint& w) const;
  FactoredPoint gradient(const FactoredPoint& w) const;
  double hess_quadratic(const FactoredPoint& w, const FactoredPoint& d) const;
  FactoredPoint hess_vec(const FactoredPoint& w, const FactoredPoint& d) const;

  ObjectiveKind kind() const { return kind_; }
  double mu() const { return mu_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int r() const { return r_; }
  /// Ground truth, when the objective was built from one (else null).
  const GroundTruth* ground_truth() const { return gt_.get(); }
  const MeasurementOperator* op() const { return op_.get(); }

  FactoredPoint split(const Eigen::MatrixXd& w) const {
    return FactoredPoint::from_stacked(w, n_);
  }

 private:
  FactoredObjective(ObjectiveKind kind, double mu, int n, int m, int r);
  void check_shape(const FactoredPoint& w) const;

  ObjectiveKind kind_;
  double mu_;
  int n_, m_, r_;
  std::shared_ptr<const GroundTruth> gt_;
  std::shared_ptr<const MeasurementOperator> op_;
  LiftedObjective f_;
};

// ---------------------------------------------------------------------------
// Symmetric weighted PCA h(U) = 1/2 ||Omega ⊙ (U U^T - Xstar)||_F^2.

class SymmetricWeightedPca : public MatrixFunction {
 public:
  SymmetricWeightedPca(Eigen::MatrixXd omega, Eigen::MatrixXd xstar);

  double value(const Eigen::MatrixXd& u) const override;
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& u) const override;
  double hess_quadratic(const Eigen::MatrixXd& u,
                        const Eigen::MatrixXd& d) const override;
  Eigen::MatrixXd hess_vec(const Eigen::MatrixXd& u,
                           const Eigen::MatrixXd& d) const override;

  int n() const { return static_cast<int>(omega_.rows()); }
  const Eigen::MatrixXd& omega() const { return omega_; }
  const Eigen::MatrixXd& xstar() const { return xstar_; }

 private:
  Eigen::MatrixXd omega_;
  Eigen::MatrixXd omega_sq_;  // Omega ⊙ Omega
  Eigen::MatrixXd xstar_;
};

// ---------------------------------------------------------------------------
// Empirical restricted strong convexity / smoothness probe.

struct SmoothnessEstimate {
  double a_hat;  // min sampled curvature ratio
  double b_hat;  // max sampled curvature ratio
  double c_hat;  // (b_hat - a_hat) / (a_hat + b_hat)
  int trials;
};

/// Samples [∇²f(X)](D, D)/||D||_F^2 over random rank-(<=2r) base points X
/// and rank-(<=rank_dir) directions D, both built as normalized products of
/// Gaussian factors.  The estimate brackets but does not certify the true
/// restricted convexity constants.
SmoothnessEstimate restricted_convexity_probe(const LiftedObjective& f, int n,
                                              int m, int r, int rank_dir,
                                              int trials, std::uint64_t seed);

}  // namespace lowrank
