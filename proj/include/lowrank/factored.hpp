#pragma once

#include <Eigen/Dense>

#include "lowrank/rng.hpp"

namespace lowrank {

/// The stacked factored variable W = [U; V] with U n×r and V m×r.
struct FactoredPoint {
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;

  FactoredPoint(Eigen::MatrixXd u, Eigen::MatrixXd v);

  int n() const { return static_cast<int>(U.rows()); }
  int m() const { return static_cast<int>(V.rows()); }
  int r() const { return static_cast<int>(U.cols()); }

  /// (n+m)×r stacked form [U; V].
  Eigen::MatrixXd stacked() const;
  static FactoredPoint from_stacked(const Eigen::MatrixXd& w, int n);

  /// Right-multiplication by an r×r matrix: [U R; V R].
  FactoredPoint rotated(const Eigen::MatrixXd& R) const;

  double frob_norm() const;
  Eigen::MatrixXd product() const { return U * V.transpose(); }
};

/// The sign-flipped stacking [U; -V].
FactoredPoint hat_stack(const FactoredPoint& w);

/// Result of aligning one factored point onto another.
struct AlignmentResult {
  Eigen::MatrixXd rotation;  // r×r orthogonal
  double distance;           // ||W1 - W2 * rotation||_F
};

/// Solves min_R ||W1 - W2 R||_F over orthogonal R via the SVD of W2^T W1.
AlignmentResult procrustes_align(const FactoredPoint& w1, const FactoredPoint& w2);
AlignmentResult procrustes_align(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2);

/// Rotation-class distance min_R ||W1 - W2 R||_F.
double dist(const FactoredPoint& w1, const FactoredPoint& w2);
double dist(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2);

/// A low-rank target X* held as a reduced SVD Phi * diag(sigma) * Psi^T,
/// together with the factorization rank r_model the solvers work at.
class GroundTruth {
 public:
  /// Reduced SVD of a dense matrix; singular vectors are gauge-fixed so
  /// the largest-magnitude entry of each left singular vector is positive.
  static GroundTruth from_matrix(const Eigen::MatrixXd& x, int r_model);

  /// Random orthonormal factors around a prescribed spectrum.
  static GroundTruth from_spectrum(int n, int m, const Eigen::VectorXd& sigma,
                                   int r_model, Rng& rng);

  const Eigen::MatrixXd& phi() const { return phi_; }
  const Eigen::MatrixXd& psi() const { return psi_; }
  const Eigen::VectorXd& sigma() const { return sigma_; }

  int n() const { return static_cast<int>(phi_.rows()); }
  int m() const { return static_cast<int>(psi_.rows()); }
  /// rank(X*).
  int rank() const { return static_cast<int>(sigma_.size()); }
  /// Factorization rank r.
  int r_model() const { return r_model_; }

  bool exact_parameterized() const { return r_model_ == rank(); }
  bool over_parameterized() const { return r_model_ > rank(); }
  bool under_parameterized() const { return r_model_ < rank(); }

  double sigma1() const { return sigma_(0); }
  /// min(r_model, rank)-th singular value of X*.
  double sigma_r() const;
  double kappa() const { return sigma1() / sigma_r(); }
  double frob_norm() const { return sigma_.norm(); }
  double spectral_norm() const { return sigma1(); }

  Eigen::MatrixXd xstar() const;

  /// Balanced factorization of the best rank-r approximation:
  /// U = Phi_sel Sigma_sel^{1/2} R, V = Psi_sel Sigma_sel^{1/2} R where
  /// R is l×r with R R^T = I_l and l = min(r_model, rank).
  FactoredPoint optimum(const Eigen::MatrixXd& R) const;
  /// Canonical representative (R = [I 0]).
  FactoredPoint optimum() const;

  // Landscape scale constants of W* = optimum(): spectral norm and the
  // Frobenius norm of W* W*^T (exact parameterization).
  double wstar_spectral() const;
  double wstar_gram_fro() const;

 private:
  GroundTruth(Eigen::MatrixXd phi, Eigen::VectorXd sigma, Eigen::MatrixXd psi,
              int r_model);
  void validate() const;

  Eigen::MatrixXd phi_;
  Eigen::VectorXd sigma_;
  Eigen::MatrixXd psi_;
  int r_model_;
};

/// Balanced factor pair W* for an explicit rotation R (validated orthogonal).
FactoredPoint ground_truth_factor(const GroundTruth& gt, const Eigen::MatrixXd& R);

}  // namespace lowrank
