#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "lowrank/errors.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/sensing.hpp"

using namespace lowrank;

TEST_CASE("ensembles regenerate bit-identically from their parameters") {
  MeasurementOperator a = MeasurementOperator::gaussian(4, 3, 10, 7);
  MeasurementOperator b = MeasurementOperator::gaussian(4, 3, 10, 7);
  for (int l = 0; l < 10; ++l)
    CHECK((a.matrix(l) - b.matrix(l)).norm() == 0.0);
  CHECK(a.manifest_line() == "gaussian 4 3 10 7");
}

TEST_CASE("pooled entry variance matches the 1/p design") {
  const int p = 2000, n = 8, m = 8;
  MeasurementOperator op = MeasurementOperator::gaussian(n, m, p, 3);
  double sum = 0, sum_sq = 0;
  for (int l = 0; l < p; ++l) {
    Eigen::MatrixXd a = op.matrix(l);
    sum += a.sum();
    sum_sq += a.squaredNorm();
  }
  double count = double(p) * n * m;
  double mean = sum / count;
  double var = sum_sq / count - mean * mean;
  CHECK(var > 0.9 / p);
  CHECK(var < 1.1 / p);
  CHECK(std::abs(mean) < 5.0 / std::sqrt(count * p));
}

TEST_CASE("apply is linear and zero maps to zero") {
  MeasurementOperator op = MeasurementOperator::gaussian(5, 4, 30, 11);
  Rng rng(1);
  CHECK(op.apply(Eigen::MatrixXd::Zero(5, 4)).norm() == 0.0);
  Eigen::MatrixXd x1 = rng.gaussian_matrix(5, 4);
  Eigen::MatrixXd x2 = rng.gaussian_matrix(5, 4);
  double alpha = 2.75;
  Eigen::VectorXd lhs = op.apply(alpha * x1 + x2);
  Eigen::VectorXd rhs = alpha * op.apply(x1) + op.apply(x2);
  CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());
}

TEST_CASE("adjoint satisfies the inner-product identity") {
  MeasurementOperator op = MeasurementOperator::gaussian(6, 5, 40, 13);
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd x = rng.gaussian_matrix(6, 5);
    Eigen::VectorXd y = rng.gaussian_matrix(40, 1);
    double lhs = op.apply(x).dot(y);
    double rhs = x.cwiseProduct(op.adjoint(y)).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("the basis operator is an exact isometry") {
  MeasurementOperator op = MeasurementOperator::basis(4, 3);
  CHECK(op.p() == 12);
  RipReport rep = rip_estimate(op, 2, 50, 5);
  CHECK(rep.delta_hat < 1e-12);
  CHECK(rep.min_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empirical isometry constants shrink with more measurements") {
  double mean_small = 0, mean_large = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    MeasurementOperator small = MeasurementOperator::gaussian(10, 10, 50, seed);
    MeasurementOperator large = MeasurementOperator::gaussian(10, 10, 800, seed);
    mean_small += rip_estimate(small, 1, 40, seed).delta_hat;
    mean_large += rip_estimate(large, 1, 40, seed).delta_hat;
  }
  CHECK(mean_large < mean_small);
}

TEST_CASE("higher-rank isometry estimates dominate lower-rank ones exactly") {
  MeasurementOperator op = MeasurementOperator::gaussian(8, 8, 60, 21);
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    RipReport r1 = rip_estimate(op, 1, 50, seed);
    RipReport r2 = rip_estimate(op, 2, 50, seed);
    CHECK(r2.delta_hat >= r1.delta_hat);
  }
}

TEST_CASE("memory cap guards oversized ensembles") {
  CHECK_THROWS_AS(MeasurementOperator::gaussian(1000, 1000, 1000, 0),
                  ResourceError);
}

TEST_CASE("shape mismatches raise dimension errors") {
  MeasurementOperator op = MeasurementOperator::gaussian(4, 3, 10, 1);
  CHECK_THROWS_AS(op.apply(Eigen::MatrixXd::Zero(3, 4)), DimensionError);
  CHECK_THROWS_AS(op.adjoint(Eigen::VectorXd::Zero(11)), DimensionError);
}

TEST_CASE("dump emits a manifest followed by every matrix") {
  MeasurementOperator op = MeasurementOperator::gaussian(2, 2, 3, 9);
  std::ostringstream os;
  op.dump(os);
  std::istringstream is(os.str());
  std::string kind;
  int n, m, p;
  std::uint64_t seed;
  is >> kind >> n >> m >> p >> seed;
  CHECK(kind == "gaussian");
  CHECK(n == 2);
  CHECK(p == 3);
}

TEST_CASE("the lifted sensing gradient vanishes at the target") {
  Rng rng(30);
  MeasurementOperator op = MeasurementOperator::gaussian(5, 4, 60, 31);
  Eigen::MatrixXd xstar = rng.gaussian_matrix(5, 2) *
                          rng.gaussian_matrix(4, 2).transpose();
  Eigen::VectorXd y = op.apply(xstar);
  Eigen::MatrixXd grad = op.adjoint(op.apply(xstar) - y);
  CHECK(grad.norm() == 0.0);
}
