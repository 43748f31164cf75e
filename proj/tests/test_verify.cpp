#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <memory>

#include "lowrank/errors.hpp"
#include "lowrank/objectives.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/verify.hpp"

using namespace lowrank;

namespace {

class ZeroObjective : public MatrixFunction {
 public:
  double value(const Eigen::MatrixXd&) const override { return 0.0; }
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& w) const override {
    return Eigen::MatrixXd::Zero(w.rows(), w.cols());
  }
  double hess_quadratic(const Eigen::MatrixXd&,
                        const Eigen::MatrixXd&) const override {
    return 0.0;
  }
  Eigen::MatrixXd hess_vec(const Eigen::MatrixXd&,
                           const Eigen::MatrixXd& d) const override {
    return Eigen::MatrixXd::Zero(d.rows(), d.cols());
  }
};

/// The balance regularizer alone, as a standalone twice-differentiable map.
class RegularizerOnly : public MatrixFunction {
 public:
  RegularizerOnly(int n, double mu) : n_(n), mu_(mu) {}
  double value(const Eigen::MatrixXd& w) const override {
    return regularizer_value(FactoredPoint::from_stacked(w, n_), mu_);
  }
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& w) const override {
    return regularizer_gradient(FactoredPoint::from_stacked(w, n_), mu_).stacked();
  }
  double hess_quadratic(const Eigen::MatrixXd& w,
                        const Eigen::MatrixXd& d) const override {
    return regularizer_hess_quadratic(FactoredPoint::from_stacked(w, n_),
                                      FactoredPoint::from_stacked(d, n_), mu_);
  }
  Eigen::MatrixXd hess_vec(const Eigen::MatrixXd& w,
                           const Eigen::MatrixXd& d) const override {
    return regularizer_hess_vec(FactoredPoint::from_stacked(w, n_),
                                FactoredPoint::from_stacked(d, n_), mu_)
        .stacked();
  }

 private:
  int n_;
  double mu_;
};

}  // namespace

TEST_CASE("finite differences confirm the factorization derivatives") {
  Rng rng(1);
  Eigen::VectorXd sigma(2);
  sigma << 2.0, 0.8;
  auto gt = std::make_shared<const GroundTruth>(
      GroundTruth::from_spectrum(4, 3, sigma, 2, rng));
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  Eigen::MatrixXd w = rng.gaussian_matrix(7, 2);
  CHECK(fd_check(g, w, 1) < 1e-6);
  CHECK(fd_check(g, w, 2) < 1e-4);
}

TEST_CASE("finite differences confirm the regularizer Hessian") {
  Rng rng(2);
  RegularizerOnly rho(4, 0.5);
  Eigen::MatrixXd w = rng.gaussian_matrix(7, 2);
  CHECK(fd_check(rho, w, 1) < 1e-6);
  CHECK(fd_check(rho, w, 2) < 1e-4);
}

TEST_CASE("the zero objective has exactly zero disagreement") {
  ZeroObjective zero;
  Rng rng(3);
  Eigen::MatrixXd w = rng.gaussian_matrix(5, 2);
  CHECK(fd_check(zero, w, 1) == 0.0);
  CHECK(fd_check(zero, w, 2) == 0.0);
}

TEST_CASE("orders outside {1, 2} are rejected") {
  ZeroObjective zero;
  CHECK_THROWS_AS(fd_check(zero, Eigen::MatrixXd::Zero(2, 2), 3), ValidationError);
}

TEST_CASE("the property suite passes wall-to-wall on a quick run") {
  auto reports = property_suite(17, 60);
  CHECK(reports.size() == property_ids().size());
  for (const auto& rep : reports) {
    INFO("property ", rep.id, " worst margin ", rep.worst_margin);
    CHECK(rep.failures == 0);
    CHECK(rep.trials == 60);
  }
}

TEST_CASE("suite reports are deterministic and replayable") {
  auto first = property_suite(23, 25);
  auto second = property_suite(23, 25);
  REQUIRE(first.size() == second.size());
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].worst_margin == second[i].worst_margin);
    CHECK(first[i].worst_index == second[i].worst_index);
    // Worst-case snapshot replays to the same margin.
    double margin =
        run_property_trial(first[i].id, 23, first[i].worst_index);
    CHECK(margin == first[i].worst_margin);
  }
}

TEST_CASE("unknown properties and empty budgets are rejected") {
  CHECK_THROWS_AS(run_property_trial("no_such_property", 0, 0), ValidationError);
  CHECK_THROWS_AS(property_suite(0, 0), ValidationError);
}

TEST_CASE("the tight cases of the trace and alignment bounds stay tight") {
  // A = B makes the aligned Gram inequality an equality at zero.
  Rng rng(5);
  Eigen::MatrixXd b = rng.gaussian_matrix(5, 2);
  Eigen::MatrixXd gap = (b * b.transpose() - b * b.transpose());
  double lhs = (gap * b).cwiseProduct(Eigen::MatrixXd::Zero(5, 2)).sum();
  CHECK(lhs == 0.0);
}
