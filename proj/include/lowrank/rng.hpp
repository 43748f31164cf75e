#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace lowrank {

// Deterministic random streams.
//
// All randomness in the library flows through SplitMix64 (Steele, Lea,
// Flood 2014), a counter-style 64-bit generator: each call advances the
// state by a fixed odd constant and returns a mixed copy of it.  The
// output sequence therefore depends only on the seed and the number of
// calls made, independent of platform and build flags.
//
// Stream layout: Rng::stream(seed, k) seeds a fresh generator with
// mix(seed, k) so that trial k of an experiment owns its own stream and
// trials can run in any order (or in parallel) without changing results.
//
// Uniform doubles take the top 53 bits of a draw; Gaussians use the
// Box-Muller transform on (0,1] uniforms with one cached spare, so the
// sequence of Gaussian draws is also fully determined by (seed, k).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent stream `index` derived from `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal draw.
  double gaussian();

  /// Matrix of i.i.d. standard normals, filled row-major.
  Eigen::MatrixXd gaussian_matrix(int rows, int cols);

  /// Uniform draw from the unit Frobenius sphere of rows×cols matrices.
  Eigen::MatrixXd sphere_matrix(int rows, int cols);

  /// Haar-distributed k×k orthogonal matrix (QR of a Gaussian matrix with
  /// the sign convention diag(R) > 0).
  Eigen::MatrixXd random_orthogonal(int k);

  /// rows×cols (rows >= cols) matrix with orthonormal columns.
  Eigen::MatrixXd random_orthonormal(int rows, int cols);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lowrank
