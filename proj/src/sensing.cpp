#include "lowrank/sensing.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "lowrank/constants.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/matrix_io.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

MeasurementOperator::MeasurementOperator(int n, int m, int p, std::uint64_t seed,
                                         std::string kind)
    : n_(n), m_(m), p_(p), seed_(seed), kind_(std::move(kind)) {
  if (n < 1 || m < 1 || p < 1)
    throw ValidationError("MeasurementOperator: n, m, p must be >= 1");
  long long scalars = 1LL * p * n * m;
  if (scalars > cap::ensemble_scalars)
    throw ResourceError("MeasurementOperator: p*n*m exceeds the memory cap");
  rows_.resize(p, n * m);
}

MeasurementOperator MeasurementOperator::gaussian(int n, int m, int p,
                                                  std::uint64_t seed) {
  MeasurementOperator op(n, m, p, seed, "gaussian");
  double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (int l = 0; l < p; ++l) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(l));
    for (int k = 0; k < n * m; ++k) op.rows_(l, k) = scale * rng.gaussian();
  }
  return op;
}

MeasurementOperator MeasurementOperator::basis(int n, int m) {
  MeasurementOperator op(n, m, n * m, 0, "basis");
  op.rows_.setZero();
  for (int l = 0; l < n * m; ++l) op.rows_(l, l) = 1.0;
  return op;
}

namespace {

Eigen::VectorXd vec_row_major(const Eigen::MatrixXd& x) {
  Eigen::VectorXd v(x.size());
  int k = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) v(k++) = x(i, j);
  return v;
}

}  // namespace

Eigen::VectorXd MeasurementOperator::apply(const Eigen::MatrixXd& x) const {
  if (x.rows() != n_ || x.cols() != m_)
    throw DimensionError("apply: X has wrong shape");
  return rows_ * vec_row_major(x);
}

Eigen::MatrixXd MeasurementOperator::adjoint(const Eigen::VectorXd& y) const {
  if (y.size() != p_) throw DimensionError("adjoint: y has wrong length");
  Eigen::VectorXd v = rows_.transpose() * y;
  Eigen::MatrixXd out(n_, m_);
  int k = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < m_; ++j) out(i, j) = v(k++);
  return out;
}

Eigen::MatrixXd MeasurementOperator::matrix(int l) const {
  if (l < 0 || l >= p_) throw DimensionError("matrix: index out of range");
  Eigen::MatrixXd out(n_, m_);
  int k = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < m_; ++j) out(i, j) = rows_(l, k++);
  return out;
}

std::string MeasurementOperator::manifest_line() const {
  std::ostringstream os;
  os << kind_ << " " << n_ << " " << m_ << " " << p_ << " " << seed_;
  return os.str();
}

void MeasurementOperator::dump(std::ostream& os) const {
  os << manifest_line() << "\n\n";
  for (int l = 0; l < p_; ++l) {
    write_matrix(os, matrix(l));
    os << "\n";
  }
}

RipReport rip_estimate(const MeasurementOperator& op, int r, int trials,
                       std::uint64_t seed) {
  if (r < 1) throw ValidationError("rip_estimate: r must be >= 1");
  if (trials < 1) throw ValidationError("rip_estimate: trials must be >= 1");
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = -min_ratio;
  // Stream index encodes (rank, trial); rank-k samples are shared between
  // rip_estimate(op, k, ...) and every higher-rank call on the same seed.
  for (int k = 1; k <= r; ++k) {
    for (int t = 0; t < trials; ++t) {
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k) * 1000003ULL + t);
      Eigen::MatrixXd left = rng.gaussian_matrix(op.n(), k);
      Eigen::MatrixXd right = rng.gaussian_matrix(op.m(), k);
      Eigen::MatrixXd d = left * right.transpose();
      d /= d.norm();
      double ratio = op.apply(d).squaredNorm();
      min_ratio = std::min(min_ratio, ratio);
      max_ratio = std::max(max_ratio, ratio);
    }
  }
  double delta = std::max(max_ratio - 1.0, 1.0 - min_ratio);
  return {r, delta, trials, min_ratio, max_ratio};
}

}  // namespace lowrank
