#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <sstream>

#include "lowrank/errors.hpp"
#include "lowrank/factored.hpp"
#include "lowrank/matrix_io.hpp"
#include "lowrank/rng.hpp"

using namespace lowrank;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("deterministic streams repeat and decorrelate") {
  Rng a = Rng::stream(7, 3);
  Rng b = Rng::stream(7, 3);
  Rng c = Rng::stream(7, 4);
  bool all_equal = true, any_equal_cross = false;
  for (int i = 0; i < 64; ++i) {
    auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    all_equal = all_equal && (x == y);
    any_equal_cross = any_equal_cross || (x == z);
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_cross);
}

TEST_CASE("gaussian draws have sane moments") {
  Rng rng(42);
  const int n = 200000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    double g = rng.gaussian();
    sum += g;
    sum_sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}

TEST_CASE("random orthogonal matrices are orthogonal") {
  Rng rng(5);
  for (int k : {1, 2, 5}) {
    Eigen::MatrixXd q = rng.random_orthogonal(k);
    CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(k, k)).norm() < 1e-12);
  }
}

TEST_CASE("matrix text format round-trips at full precision") {
  Rng rng(11);
  Eigen::MatrixXd m = rng.gaussian_matrix(5, 3) * 1e7;
  m(0, 0) = 1.0 / 3.0;
  m(1, 2) = -2.2250738585072014e-308;
  Eigen::MatrixXd back = matrix_from_string(matrix_to_string(m));
  CHECK(back.rows() == m.rows());
  CHECK(back.cols() == m.cols());
  CHECK((back - m).norm() == 0.0);
}

TEST_CASE("hat stacking flips the sign of the bottom block") {
  FactoredPoint w(mat({{1}}), mat({{1}}));
  FactoredPoint h = hat_stack(w);
  CHECK(h.U(0, 0) == 1.0);
  CHECK(h.V(0, 0) == -1.0);
  // Double application is the identity.
  FactoredPoint hh = hat_stack(h);
  CHECK((hh.U - w.U).norm() == 0.0);
  CHECK((hh.V - w.V).norm() == 0.0);
}

TEST_CASE("hat stacking fixes points with a zero bottom block") {
  FactoredPoint w(mat({{2, 1}, {0, 3}}), Eigen::MatrixXd::Zero(3, 2));
  FactoredPoint h = hat_stack(w);
  CHECK((h.stacked() - w.stacked()).norm() == 0.0);
}

TEST_CASE("hat cross Gram equals the difference of factor Grams") {
  Rng rng(3);
  FactoredPoint w(rng.gaussian_matrix(3, 2), rng.gaussian_matrix(4, 2));
  Eigen::MatrixXd lhs = hat_stack(w).stacked().transpose() * w.stacked();
  Eigen::MatrixXd rhs =
      w.U.transpose() * w.U - w.V.transpose() * w.V;  // independent route
  CHECK((lhs - rhs).norm() < 1e-14);
}

TEST_CASE("finite-entry invariant is enforced") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 1);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(FactoredPoint(bad, Eigen::MatrixXd::Zero(2, 1)), ValidationError);
  CHECK_THROWS_AS(FactoredPoint(Eigen::MatrixXd::Zero(2, 1),
                                Eigen::MatrixXd::Zero(2, 2)),
                  DimensionError);
}

TEST_CASE("aligning a point with itself gives zero distance") {
  Rng rng(9);
  FactoredPoint w(rng.gaussian_matrix(3, 2), rng.gaussian_matrix(2, 2));
  AlignmentResult res = procrustes_align(w, w);
  CHECK(res.distance < 1e-12);
  CHECK((res.rotation.transpose() * res.rotation -
         Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("alignment undoes a planted rotation exactly") {
  Rng rng(10);
  FactoredPoint w2(rng.gaussian_matrix(4, 3), rng.gaussian_matrix(3, 3));
  Eigen::MatrixXd r0 = rng.random_orthogonal(3);
  FactoredPoint w1 = w2.rotated(r0);
  AlignmentResult res = procrustes_align(w1, w2);
  CHECK(res.distance < 1e-12);
  CHECK((w2.rotated(res.rotation).stacked() - w1.stacked()).norm() < 1e-12);
}

TEST_CASE("alignment beats a large Monte-Carlo sample of rotations") {
  Rng rng(12);
  Eigen::MatrixXd w1 = rng.gaussian_matrix(5, 2);
  Eigen::MatrixXd w2 = rng.gaussian_matrix(5, 2);
  double exact = dist(w1, w2);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100000; ++i) {
    Eigen::MatrixXd q = rng.random_orthogonal(2);
    best = std::min(best, (w1 - w2 * q).norm());
  }
  CHECK(exact <= best + 1e-12);
  CHECK(best - exact < 1e-6);
}

TEST_CASE("aligned cross Gram is symmetric positive semidefinite") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd w1 = rng.gaussian_matrix(6, 3);
    Eigen::MatrixXd w2 = rng.gaussian_matrix(6, 3);
    AlignmentResult res = procrustes_align(w1, w2);
    Eigen::MatrixXd cross = w1.transpose() * (w2 * res.rotation);
    CHECK((cross - cross.transpose()).norm() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cross);
    CHECK(eig.eigenvalues()(0) > -1e-10);
  }
}

TEST_CASE("class distance is invariant under rotations of both arguments") {
  Rng rng(14);
  FactoredPoint w1(rng.gaussian_matrix(4, 2), rng.gaussian_matrix(3, 2));
  FactoredPoint w2(rng.gaussian_matrix(4, 2), rng.gaussian_matrix(3, 2));
  double base = dist(w1, w2);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd r1 = rng.random_orthogonal(2);
    Eigen::MatrixXd r2 = rng.random_orthogonal(2);
    CHECK(std::abs(dist(w1.rotated(r1), w2.rotated(r2)) - base) < 1e-10);
  }
}

TEST_CASE("shape mismatch in alignment raises a dimension error") {
  Rng rng(15);
  FactoredPoint w1(rng.gaussian_matrix(4, 2), rng.gaussian_matrix(3, 2));
  FactoredPoint w2(rng.gaussian_matrix(4, 2), rng.gaussian_matrix(2, 2));
  CHECK_THROWS_AS(procrustes_align(w1, w2), DimensionError);
}

TEST_CASE("rank-one all-ones target factors as the all-ones vector") {
  GroundTruth gt = GroundTruth::from_matrix(mat({{1, 1}, {1, 1}}), 1);
  CHECK(gt.rank() == 1);
  CHECK(gt.sigma1() == doctest::Approx(2.0).epsilon(1e-12));
  FactoredPoint w = ground_truth_factor(gt, mat({{1}}));
  CHECK((w.U - mat({{1}, {1}})).norm() < 1e-12);
  CHECK((w.V - mat({{1}, {1}})).norm() < 1e-12);
}

TEST_CASE("diagonal target factors as the square-root diagonal") {
  GroundTruth gt = GroundTruth::from_matrix(mat({{2, 0}, {0, 1}}), 2);
  FactoredPoint w = ground_truth_factor(gt, Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd expect = mat({{std::sqrt(2.0), 0}, {0, 1}});
  CHECK((w.U - expect).norm() < 1e-12);
  CHECK((w.V - expect).norm() < 1e-12);
}

TEST_CASE("factored optimum reconstructs the target and is balanced") {
  Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd sigma(3);
    sigma << 3.0, 1.5, 0.2;
    GroundTruth gt = GroundTruth::from_spectrum(6, 5, sigma, 3, rng);
    Eigen::MatrixXd r = rng.random_orthogonal(3);
    FactoredPoint w = ground_truth_factor(gt, r);
    CHECK((w.product() - gt.xstar()).norm() < 1e-12 * gt.frob_norm());
    CHECK((w.U.transpose() * w.U - w.V.transpose() * w.V).norm() < 1e-12);
  }
}

TEST_CASE("non-orthogonal rotations are rejected") {
  Rng rng(17);
  GroundTruth gt = GroundTruth::from_matrix(mat({{2, 0}, {0, 1}}), 2);
  CHECK_THROWS_AS(ground_truth_factor(gt, mat({{1, 1}, {0, 1}})), ValidationError);
}

TEST_CASE("ground truth validates its own structure") {
  GroundTruth gt = GroundTruth::from_matrix(mat({{2, 0, 0}, {0, 1, 0}}), 2);
  int k = gt.rank();
  CHECK((gt.phi().transpose() * gt.phi() - Eigen::MatrixXd::Identity(k, k))
            .norm() < 1e-12);
  CHECK((gt.psi().transpose() * gt.psi() - Eigen::MatrixXd::Identity(k, k))
            .norm() < 1e-12);
  CHECK(gt.sigma()(0) >= gt.sigma()(1));
  CHECK(gt.sigma()(k - 1) > 0);
  CHECK((gt.xstar() - mat({{2, 0, 0}, {0, 1, 0}})).norm() < 1e-12);
  CHECK(gt.kappa() == doctest::Approx(2.0));
}

TEST_CASE("spectrum factories are deterministic per seed") {
  Eigen::VectorXd sigma(2);
  sigma << 2.0, 1.0;
  Rng a(21), b(21);
  GroundTruth g1 = GroundTruth::from_spectrum(5, 4, sigma, 2, a);
  GroundTruth g2 = GroundTruth::from_spectrum(5, 4, sigma, 2, b);
  CHECK((g1.phi() - g2.phi()).norm() == 0.0);
  CHECK((g1.psi() - g2.psi()).norm() == 0.0);
}

TEST_CASE("under-parameterized optimum keeps the top block") {
  Rng rng(22);
  Eigen::VectorXd sigma(3);
  sigma << 3.0, 2.0, 1.0;
  GroundTruth gt = GroundTruth::from_spectrum(5, 5, sigma, 1, rng);
  CHECK(gt.under_parameterized());
  FactoredPoint w = gt.optimum();
  // Best rank-1 approximation: sigma_1 * phi_1 psi_1^T.
  Eigen::MatrixXd best =
      gt.sigma()(0) * gt.phi().col(0) * gt.psi().col(0).transpose();
  CHECK((w.product() - best).norm() < 1e-12);
}

TEST_CASE("matrices round-trip through files") {
  Rng rng(23);
  Eigen::MatrixXd m = rng.gaussian_matrix(4, 6);
  std::string path = "roundtrip_scratch.txt";
  save_matrix(path, m);
  Eigen::MatrixXd back = load_matrix(path);
  std::remove(path.c_str());
  CHECK((back - m).norm() == 0.0);
}
