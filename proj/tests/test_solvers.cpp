#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <memory>
#include <sstream>

#include "lowrank/errors.hpp"
#include "lowrank/geometry.hpp"
#include "lowrank/objectives.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/solvers.hpp"

using namespace lowrank;

namespace {

std::shared_ptr<const GroundTruth> random_gt(Rng& rng, int n, int m, int r) {
  Eigen::VectorXd sigma(r);
  sigma(0) = rng.uniform(1.5, 3.0);
  for (int i = 1; i < r; ++i) sigma(i) = sigma(i - 1) * rng.uniform(0.6, 0.95);
  return std::make_shared<const GroundTruth>(
      GroundTruth::from_spectrum(n, m, sigma, r, rng));
}

DistanceFn distance_to(std::shared_ptr<const GroundTruth> gt) {
  Eigen::MatrixXd target = gt->optimum().stacked();
  return [target](const Eigen::MatrixXd& w) { return dist(w, target); };
}

}  // namespace

TEST_CASE("the optimum is a fixed point") {
  Rng rng(1);
  auto gt = random_gt(rng, 5, 4, 2);
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  SolverConfig cfg;
  cfg.grad_tol = 1e-12;
  Trajectory traj = gradient_descent(g, gt->optimum().stacked(), cfg);
  CHECK(traj.reason == Termination::grad_tol);
  CHECK(traj.iterations == 0);
  CHECK(traj.samples.size() == 1);
}

TEST_CASE("contraction audit passes inside the regularity ball") {
  Rng rng(2);
  for (int run = 0; run < 5; ++run) {
    auto gt = random_gt(rng, 6, 5, 2);
    FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
    double beta = kFactorizationConstants.regularity_beta / gt->spectral_norm();
    double alpha = kFactorizationConstants.regularity_alpha * gt->sigma_r();
    double ball = std::sqrt(gt->sigma_r());
    SolverConfig cfg;
    cfg.step_size = 2.0 * beta;
    cfg.max_iters = 400;
    cfg.grad_tol = 0.0;
    cfg.stride = 1;
    FactoredPoint w0 = sample_region(RegionLabel::R1, *gt, rng);
    Trajectory traj = gradient_descent(g, w0.stacked(), cfg, distance_to(gt));
    RateAudit audit = rate_audit(traj, alpha, cfg.step_size, ball);
    CHECK(audit.flagged_steps == 0);
    CHECK(audit.stayed_in_ball);
    CHECK(audit.steps_checked == 400);
  }
}

TEST_CASE("a zero contraction constant degenerates to a monotone audit") {
  Rng rng(3);
  auto gt = random_gt(rng, 5, 4, 2);
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  SolverConfig cfg;
  cfg.max_iters = 100;
  cfg.grad_tol = 0.0;
  cfg.stride = 1;
  FactoredPoint w0 = sample_region(RegionLabel::R1, *gt, rng);
  Trajectory traj = gradient_descent(g, w0.stacked(), cfg, distance_to(gt));
  RateAudit audit = rate_audit(traj, 0.0, traj.step_size, std::sqrt(gt->sigma_r()));
  CHECK(audit.flagged_steps == 0);
}

TEST_CASE("an oversized step is flagged or expelled from the ball") {
  Rng rng(4);
  Eigen::VectorXd sigma(2);
  sigma << 5.0, 0.25;  // ill-conditioned
  auto gt = std::make_shared<const GroundTruth>(
      GroundTruth::from_spectrum(6, 5, sigma, 2, rng));
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  SolverConfig cfg;
  cfg.step_size = 10.0 / gt->spectral_norm();
  cfg.max_iters = 60;
  cfg.grad_tol = 0.0;
  cfg.stride = 1;
  FactoredPoint w0 = sample_region(RegionLabel::R1, *gt, rng);
  Trajectory traj = gradient_descent(g, w0.stacked(), cfg, distance_to(gt));
  double alpha = kFactorizationConstants.regularity_alpha * gt->sigma_r();
  RateAudit audit = rate_audit(traj, alpha, cfg.step_size, std::sqrt(gt->sigma_r()));
  CHECK((audit.flagged_steps > 0 || !audit.stayed_in_ball ||
         traj.reason == Termination::diverged));
}

TEST_CASE("trajectories are deterministic and decimated with endpoints kept") {
  Rng rng(5);
  auto gt = random_gt(rng, 5, 4, 2);
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  SolverConfig cfg;
  cfg.max_iters = 57;
  cfg.grad_tol = 0.0;
  cfg.seed = 9;
  Eigen::MatrixXd w0 = rng.gaussian_matrix(9, 2);
  Trajectory a = gradient_descent(g, w0, cfg);
  Trajectory b = gradient_descent(g, w0, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) {
    CHECK((a.samples[i].point - b.samples[i].point).norm() == 0.0);
    CHECK(a.samples[i].value == b.samples[i].value);
  }
  CHECK(a.samples.front().iter == 0);
  CHECK(a.samples.back().iter == 57);
  // Interior samples at the decimation stride.
  CHECK(a.samples[1].iter == 10);
}

TEST_CASE("recorded values recompute from recorded iterates") {
  Rng rng(6);
  auto gt = random_gt(rng, 5, 4, 2);
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  SolverConfig cfg;
  cfg.max_iters = 40;
  cfg.grad_tol = 0.0;
  Trajectory traj = gradient_descent(g, rng.gaussian_matrix(9, 2), cfg);
  for (const auto& s : traj.samples) {
    CHECK(std::abs(g.value(s.point) - s.value) <= 1e-10 * (1.0 + s.value));
    CHECK(std::abs(g.gradient(s.point).norm() - s.grad_norm) <=
          1e-10 * (1.0 + s.grad_norm));
  }
}

TEST_CASE("zero-radius noise reproduces plain gradient descent exactly") {
  Rng rng(7);
  auto gt = random_gt(rng, 5, 4, 2);
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  SolverConfig cfg;
  cfg.max_iters = 80;
  cfg.grad_tol = 0.0;
  cfg.seed = 4;
  cfg.noise = {0.0, 1e10};  // trigger always on, radius zero
  Eigen::MatrixXd w0 = rng.gaussian_matrix(9, 2);
  Trajectory a = gradient_descent(g, w0, cfg);
  Trajectory b = perturbed_gradient_descent(g, w0, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i)
    CHECK((a.samples[i].point - b.samples[i].point).norm() == 0.0);
}

TEST_CASE("plain descent stalls at a strict saddle but noise escapes it") {
  auto gt = std::make_shared<const GroundTruth>(
      GroundTruth::from_matrix(Eigen::Vector2d(2, 1).asDiagonal(), 2));
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  Eigen::MatrixXd saddle = build_critical_point(*gt, {0}).point.stacked();

  SolverConfig stall;
  stall.max_iters = 1000;
  stall.grad_tol = 0.0;
  stall.stride = 100;
  Trajectory frozen = gradient_descent(g, saddle, stall);
  CHECK((frozen.last().point - saddle).norm() <= 1e-9);

  SolverConfig kick = stall;
  kick.max_iters = 10000;
  kick.noise = {solver::default_noise_radius, solver::default_noise_trigger};
  kick.seed = 3;
  Trajectory escaped = perturbed_gradient_descent(g, saddle, kick);
  CHECK(escaped.min_value() <= 1e-6);
}

TEST_CASE("divergence guard reports the last finite iterate") {
  Rng rng(8);
  auto gt = random_gt(rng, 4, 3, 2);
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  SolverConfig cfg;
  cfg.step_size = 50.0;  // grossly unstable
  cfg.max_iters = 500;
  cfg.grad_tol = 0.0;
  Trajectory traj = gradient_descent(g, rng.gaussian_matrix(7, 2), cfg);
  CHECK(traj.reason == Termination::diverged);
  CHECK(std::isfinite(traj.last().value));
}

TEST_CASE("csv export carries the expected header and rows") {
  Rng rng(9);
  auto gt = random_gt(rng, 4, 3, 2);
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  SolverConfig cfg;
  cfg.max_iters = 5;
  cfg.grad_tol = 0.0;
  cfg.stride = 1;
  Trajectory traj = gradient_descent(g, rng.gaussian_matrix(7, 2), cfg,
                                     distance_to(gt));
  std::ostringstream os;
  traj.write_csv(os);
  std::string text = os.str();
  CHECK(text.rfind("iter,value,grad_norm,dist\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);  // header + 6 rows
}

TEST_CASE("automatic steps respect the curvature cap") {
  Rng rng(10);
  auto gt = random_gt(rng, 5, 4, 2);
  FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
  Eigen::MatrixXd w0 = rng.gaussian_matrix(9, 2);
  double beta = kFactorizationConstants.regularity_beta / gt->spectral_norm();
  double nu = default_step_size(g, w0, beta);
  CHECK(nu > 0.0);
  CHECK(nu <= 2.0 * beta + 1e-15);
}

TEST_CASE("converged descent lands on the enumerated critical set") {
  Rng rng(11);
  for (int instance = 0; instance < 3; ++instance) {
    int r = 1 + instance;  // r = 1, 2, 3
    auto gt = random_gt(rng, 6, 5, r);
    FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
    std::vector<CriticalPoint> critical = enumerate_critical_points(*gt);
    for (int start = 0; start < 3; ++start) {
      SolverConfig cfg;
      cfg.max_iters = 200000;
      cfg.grad_tol = 1e-11;
      Eigen::MatrixXd w0 = rng.gaussian_matrix(11, r);
      Trajectory traj = gradient_descent(g, w0, cfg);
      REQUIRE(traj.reason == Termination::grad_tol);
      double nearest = std::numeric_limits<double>::infinity();
      for (const CriticalPoint& cp : critical)
        nearest = std::min(nearest,
                           dist(traj.last().point, cp.point.stacked()));
      CHECK(nearest <= 1e-6);
    }
  }
}
