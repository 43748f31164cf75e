#include "lowrank/rng.hpp"

#include <cmath>

#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

inline std::uint64_t splitmix_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
  // Two mixing rounds decorrelate (seed, index) pairs that differ in few bits.
  std::uint64_t s = seed;
  std::uint64_t a = splitmix_next(s);
  s ^= index * 0xda942042e4dd58b5ULL;
  std::uint64_t b = splitmix_next(s);
  return Rng(a ^ (b + 0x9e3779b97f4a7c15ULL));
}

std::uint64_t Rng::next_u64() { return splitmix_next(state_); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // (0,1] uniforms keep the logarithm finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Eigen::MatrixXd Rng::gaussian_matrix(int rows, int cols) {
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = gaussian();
  return out;
}

Eigen::MatrixXd Rng::sphere_matrix(int rows, int cols) {
  Eigen::MatrixXd out = gaussian_matrix(rows, cols);
  double norm = out.norm();
  while (norm == 0.0) {
    out = gaussian_matrix(rows, cols);
    norm = out.norm();
  }
  return out / norm;
}

Eigen::MatrixXd Rng::random_orthonormal(int rows, int cols) {
  if (rows < cols) throw DimensionError("random_orthonormal: rows < cols");
  Eigen::MatrixXd g = gaussian_matrix(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  Eigen::MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (int j = 0; j < cols; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

Eigen::MatrixXd Rng::random_orthogonal(int k) { return random_orthonormal(k, k); }

}  // namespace lowrank
