#include "lowrank/factored.hpp"

#include <cmath>

#include "lowrank/constants.hpp"
#include "lowrank/errors.hpp"

namespace lowrank {

FactoredPoint::FactoredPoint(Eigen::MatrixXd u, Eigen::MatrixXd v)
    : U(std::move(u)), V(std::move(v)) {
  if (U.cols() != V.cols())
    throw DimensionError("FactoredPoint: U and V must share a column count");
  if (!U.allFinite() || !V.allFinite())
    throw ValidationError("FactoredPoint: entries must be finite");
}

Eigen::MatrixXd FactoredPoint::stacked() const {
  Eigen::MatrixXd w(U.rows() + V.rows(), U.cols());
  w.topRows(U.rows()) = U;
  w.bottomRows(V.rows()) = V;
  return w;
}

FactoredPoint FactoredPoint::from_stacked(const Eigen::MatrixXd& w, int n) {
  if (n < 0 || n > w.rows())
    throw DimensionError("from_stacked: invalid split row");
  return FactoredPoint(w.topRows(n), w.bottomRows(w.rows() - n));
}

FactoredPoint FactoredPoint::rotated(const Eigen::MatrixXd& R) const {
  if (R.rows() != r()) throw DimensionError("rotated: R has wrong row count");
  return FactoredPoint(U * R, V * R);
}

double FactoredPoint::frob_norm() const {
  return std::sqrt(U.squaredNorm() + V.squaredNorm());
}

FactoredPoint hat_stack(const FactoredPoint& w) {
  return FactoredPoint(w.U, -w.V);
}

AlignmentResult procrustes_align(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2) {
  if (w1.rows() != w2.rows() || w1.cols() != w2.cols())
    throw DimensionError("procrustes_align: shape mismatch");
  Eigen::MatrixXd m = w2.transpose() * w1;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
  double distance = (w1 - w2 * rotation).norm();
  return {std::move(rotation), distance};
}

AlignmentResult procrustes_align(const FactoredPoint& w1, const FactoredPoint& w2) {
  if (w1.n() != w2.n() || w1.m() != w2.m())
    throw DimensionError("procrustes_align: shape mismatch");
  return procrustes_align(w1.stacked(), w2.stacked());
}

double dist(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2) {
  return procrustes_align(w1, w2).distance;
}

double dist(const FactoredPoint& w1, const FactoredPoint& w2) {
  return procrustes_align(w1, w2).distance;
}

GroundTruth::GroundTruth(Eigen::MatrixXd phi, Eigen::VectorXd sigma,
                         Eigen::MatrixXd psi, int r_model)
    : phi_(std::move(phi)), sigma_(std::move(sigma)), psi_(std::move(psi)),
      r_model_(r_model) {
  validate();
}

void GroundTruth::validate() const {
  if (r_model_ < 1) throw ValidationError("GroundTruth: r_model must be >= 1");
  if (sigma_.size() == 0) throw ValidationError("GroundTruth: empty spectrum");
  if (phi_.cols() != sigma_.size() || psi_.cols() != sigma_.size())
    throw DimensionError("GroundTruth: factor/spectrum size mismatch");
  for (int i = 0; i < sigma_.size(); ++i) {
    if (!(sigma_(i) > 0))
      throw ValidationError("GroundTruth: spectrum must be strictly positive");
    if (i > 0 && sigma_(i) > sigma_(i - 1))
      throw ValidationError("GroundTruth: spectrum must be nonincreasing");
  }
  int k = rank();
  double ortho_phi =
      (phi_.transpose() * phi_ - Eigen::MatrixXd::Identity(k, k)).norm();
  double ortho_psi =
      (psi_.transpose() * psi_ - Eigen::MatrixXd::Identity(k, k)).norm();
  if (ortho_phi > tol::structural * std::sqrt(double(k)) * 10 ||
      ortho_psi > tol::structural * std::sqrt(double(k)) * 10)
    throw ValidationError("GroundTruth: factors not orthonormal");
}

namespace {

// Deterministic sign gauge: largest-magnitude entry of each left singular
// vector made positive, the right vector flipped with it.
void fix_sign_gauge(Eigen::MatrixXd& left, Eigen::MatrixXd& right) {
  for (int j = 0; j < left.cols(); ++j) {
    int idx = 0;
    left.col(j).cwiseAbs().maxCoeff(&idx);
    if (left(idx, j) < 0) {
      left.col(j) = -left.col(j);
      right.col(j) = -right.col(j);
    }
  }
}

}  // namespace

GroundTruth GroundTruth::from_matrix(const Eigen::MatrixXd& x, int r_model) {
  if (x.rows() < 1 || x.cols() < 1) throw DimensionError("from_matrix: empty");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  double cutoff = s(0) * tol::structural;
  int rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  if (rank == 0) throw ValidationError("from_matrix: zero matrix");
  Eigen::MatrixXd phi = svd.matrixU().leftCols(rank);
  Eigen::MatrixXd psi = svd.matrixV().leftCols(rank);
  fix_sign_gauge(phi, psi);
  return GroundTruth(std::move(phi), s.head(rank), std::move(psi), r_model);
}

GroundTruth GroundTruth::from_spectrum(int n, int m, const Eigen::VectorXd& sigma,
                                       int r_model, Rng& rng) {
  int k = static_cast<int>(sigma.size());
  if (k > n || k > m)
    throw DimensionError("from_spectrum: spectrum longer than min(n, m)");
  Eigen::MatrixXd phi = rng.random_orthonormal(n, k);
  Eigen::MatrixXd psi = rng.random_orthonormal(m, k);
  fix_sign_gauge(phi, psi);
  return GroundTruth(std::move(phi), sigma, std::move(psi), r_model);
}

double GroundTruth::sigma_r() const {
  int idx = std::min(r_model_, rank()) - 1;
  return sigma_(idx);
}

Eigen::MatrixXd GroundTruth::xstar() const {
  return phi_ * sigma_.asDiagonal() * psi_.transpose();
}

FactoredPoint GroundTruth::optimum(const Eigen::MatrixXd& R) const {
  int l = std::min(r_model_, rank());
  if (R.rows() != l || R.cols() != r_model_)
    throw DimensionError("optimum: R must be l×r with l = min(r_model, rank)");
  double gauge = (R * R.transpose() - Eigen::MatrixXd::Identity(l, l)).norm();
  if (gauge > tol::derived)
    throw ValidationError("optimum: R must have orthonormal rows");
  Eigen::VectorXd root = sigma_.head(l).cwiseSqrt();
  Eigen::MatrixXd u = phi_.leftCols(l) * root.asDiagonal() * R;
  Eigen::MatrixXd v = psi_.leftCols(l) * root.asDiagonal() * R;
  return FactoredPoint(std::move(u), std::move(v));
}

FactoredPoint GroundTruth::optimum() const {
  int l = std::min(r_model_, rank());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(l, r_model_);
  R.leftCols(l).setIdentity();
  return optimum(R);
}

double GroundTruth::wstar_spectral() const {
  return std::sqrt(2.0 * sigma1());
}

double GroundTruth::wstar_gram_fro() const {
  int l = std::min(r_model_, rank());
  return 2.0 * sigma_.head(l).norm();
}

FactoredPoint ground_truth_factor(const GroundTruth& gt, const Eigen::MatrixXd& R) {
  return gt.optimum(R);
}

}  // namespace lowrank
