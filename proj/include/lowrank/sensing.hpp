#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace lowrank {

/// A linear measurement map X ↦ (<A_1, X>, ..., <A_p, X>) held densely.
class MeasurementOperator {
 public:
  /// Gaussian ensemble: every A_l has i.i.d. N(0, 1/p) entries.  Matrix l
  /// is filled row-major from stream (seed, l), so the ensemble is
  /// reproducible bit-for-bit from (n, m, p, seed).
  static MeasurementOperator gaussian(int n, int m, int p, std::uint64_t seed);

  /// The p = n*m unscaled standard-basis matrices (an exact isometry).
  static MeasurementOperator basis(int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  int p() const { return p_; }
  std::uint64_t seed() const { return seed_; }

  Eigen::VectorXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd adjoint(const Eigen::VectorXd& y) const;

  /// The l-th measurement matrix A_l.
  Eigen::MatrixXd matrix(int l) const;

  /// One-line description sufficient to regenerate the ensemble.
  std::string manifest_line() const;
  /// Full dump: every A_l in the repo matrix format, blank-line separated.
  void dump(std::ostream& os) const;

 private:
  MeasurementOperator(int n, int m, int p, std::uint64_t seed, std::string kind);

  int n_, m_, p_;
  std::uint64_t seed_;
  std::string kind_;
  // Row l is vec(A_l) in row-major order.
  Eigen::MatrixXd rows_;
};

/// Empirical restricted-isometry diagnostics.  delta_hat lower-bounds the
/// true constant: sampling cannot certify the supremum.
struct RipReport {
  int r_tested;
  double delta_hat;
  int trials;
  double min_ratio;
  double max_ratio;
};

/// Samples unit-norm matrices of rank k for every k <= r and records the
/// worst deviation of ||A(D)||^2 from 1.  Lower ranks reuse the same
/// streams inside higher-rank calls, so delta_hat is monotone in r by
/// construction.
RipReport rip_estimate(const MeasurementOperator& op, int r, int trials,
                       std::uint64_t seed);

}  // namespace lowrank
