#include "lowrank/verify.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>

#include "lowrank/constants.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/factored.hpp"
#include "lowrank/objectives.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/sensing.hpp"

namespace lowrank {

double fd_check(const MatrixFunction& fn, const Eigen::MatrixXd& at, int order,
                std::uint64_t seed) {
  if (order != 1 && order != 2)
    throw ValidationError("fd_check: order must be 1 or 2");
  const double eps = std::numeric_limits<double>::epsilon();
  if (order == 1) {
    double step = std::cbrt(eps) * (1.0 + at.norm());
    Eigen::MatrixXd grad = fn.gradient(at);
    Eigen::MatrixXd fd(at.rows(), at.cols());
    Eigen::MatrixXd point = at;
    for (Eigen::Index i = 0; i < at.rows(); ++i) {
      for (Eigen::Index j = 0; j < at.cols(); ++j) {
        point(i, j) = at(i, j) + step;
        double up = fn.value(point);
        point(i, j) = at(i, j) - step;
        double down = fn.value(point);
        point(i, j) = at(i, j);
        fd(i, j) = (up - down) / (2.0 * step);
      }
    }
    double denom = std::max(grad.norm(), fd.norm());
    if (denom == 0.0) return 0.0;
    return (fd - grad).norm() / denom;
  }
  // Second differences use the quarter-power step, the optimal scaling for
  // three-point curvature stencils.
  double step = std::pow(eps, 0.25) * (1.0 + at.norm());
  double center = fn.value(at);
  double worst = 0.0;
  Rng rng = Rng::stream(seed, 0xfd2);
  for (int k = 0; k < 10; ++k) {
    Eigen::MatrixXd dir = rng.sphere_matrix(int(at.rows()), int(at.cols()));
    double quad = fn.hess_quadratic(at, dir);
    double fd = (fn.value(at + step * dir) - 2.0 * center +
                 fn.value(at - step * dir)) /
                (step * step);
    double denom = std::max(std::abs(quad), std::abs(fd));
    if (denom == 0.0) continue;
    worst = std::max(worst, std::abs(fd - quad) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Property suite.

namespace {

using TrialFn = std::function<double(std::uint64_t seed, std::uint64_t index)>;

// Balanced factors: U = P C, V = Q C with orthonormal P, Q.
FactoredPoint balanced_point(Rng& rng, int n, int m, int r) {
  Eigen::MatrixXd c = rng.gaussian_matrix(r, r);
  return FactoredPoint(rng.random_orthonormal(n, r) * c,
                       rng.random_orthonormal(m, r) * c);
}

GroundTruth random_gt(Rng& rng, int n, int m, int r) {
  Eigen::VectorXd sigma(r);
  sigma(0) = rng.uniform(1.0, 3.0);
  for (int i = 1; i < r; ++i) sigma(i) = sigma(i - 1) * rng.uniform(0.4, 1.0);
  return GroundTruth::from_spectrum(n, m, sigma, r, rng);
}

double trial_psd_trace_bound(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0x100000 + index);
  int n = 2 + int(rng.uniform(0, 7));
  Eigen::MatrixXd g = rng.gaussian_matrix(n, n);
  Eigen::MatrixXd h = rng.gaussian_matrix(n, n);
  Eigen::MatrixXd a = g * g.transpose();
  Eigen::MatrixXd b = h * h.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  double lo = svd.singularValues()(n - 1) * b.trace();
  double hi = svd.singularValues()(0) * b.trace();
  double mid = (a * b).trace();
  double scale = std::max(1.0, hi);
  return std::min(mid - lo, hi - mid) / scale;
}

double trial_product_frobenius_bound(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0x200000 + index);
  int r = 1 + int(rng.uniform(0, 4));
  int n = r + int(rng.uniform(0, 7));
  Eigen::MatrixXd b = rng.gaussian_matrix(n, r);
  Eigen::MatrixXd m = rng.gaussian_matrix(r, r);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  double lo = svd.singularValues()(r - 1) * b.norm();
  double hi = svd.singularValues()(0) * b.norm();
  double mid = (b * m).norm();
  double scale = std::max(1.0, hi);
  return std::min(mid - lo, hi - mid) / scale;
}

double trial_balanced_energy_identity(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0x300000 + index);
  int r = 1 + int(rng.uniform(0, 3));
  int n = r + int(rng.uniform(0, 6));
  int m = r + int(rng.uniform(0, 6));
  FactoredPoint w = balanced_point(rng, n, m, r);
  Eigen::MatrixXd du = rng.gaussian_matrix(n, r);
  Eigen::MatrixXd dv = rng.gaussian_matrix(m, r);
  double on_blocks = (du * w.U.transpose()).squaredNorm() +
                     (dv * w.V.transpose()).squaredNorm();
  double off_blocks = (du * w.V.transpose()).squaredNorm() +
                      (dv * w.U.transpose()).squaredNorm();
  double scale = std::max(1.0, on_blocks);
  return -std::abs(on_blocks - off_blocks) / scale;
}

double trial_balanced_regularizer_psd(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0x400000 + index);
  int r = 1 + int(rng.uniform(0, 3));
  int n = r + int(rng.uniform(0, 6));
  int m = r + int(rng.uniform(0, 6));
  FactoredPoint w = balanced_point(rng, n, m, r);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 5; ++k) {
    FactoredPoint d(rng.gaussian_matrix(n, r), rng.gaussian_matrix(m, r));
    double form = regularizer_hess_quadratic(w, d, 0.5);
    double scale = std::max(1.0, d.frob_norm() * d.frob_norm() *
                                     w.frob_norm() * w.frob_norm());
    worst = std::min(worst, form / scale);
  }
  return worst;
}

double trial_gap_decomposition_identity(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0x500000 + index);
  int r = 1 + int(rng.uniform(0, 3));
  int n = r + 1 + int(rng.uniform(0, 4));
  int m = r + 1 + int(rng.uniform(0, 4));
  GroundTruth gt = random_gt(rng, n, m, r);
  auto gtp = std::make_shared<const GroundTruth>(gt);
  FactoredObjective g = FactoredObjective::factorization(gtp, 0.5);
  FactoredPoint w(rng.gaussian_matrix(n, r), rng.gaussian_matrix(m, r));
  FactoredPoint wstar = gt.optimum();
  Eigen::MatrixXd ws = w.stacked(), os = wstar.stacked();
  double gram_gap =
      (ws * ws.transpose() - os * os.transpose()).squaredNorm();
  double cross =
      (w.U.transpose() * wstar.U - w.V.transpose() * wstar.V).squaredNorm();
  double value = g.value(w);
  double resid = value - (gram_gap / 8.0 + cross / 4.0);
  double scale = std::max(1.0, value);
  return tol::derived - std::abs(resid) / scale;
}

double trial_gap_lower_bound(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0x600000 + index);
  int r = 1 + int(rng.uniform(0, 3));
  int n = r + 1 + int(rng.uniform(0, 4));
  int m = r + 1 + int(rng.uniform(0, 4));
  GroundTruth gt = random_gt(rng, n, m, r);
  auto gtp = std::make_shared<const GroundTruth>(gt);
  FactoredPoint w(rng.gaussian_matrix(n, r), rng.gaussian_matrix(m, r));
  Eigen::MatrixXd ws = w.stacked(), os = gt.optimum().stacked();
  double gram_gap =
      (ws * ws.transpose() - os * os.transpose()).squaredNorm();
  double worst = std::numeric_limits<double>::infinity();
  for (double mu : {0.1, 0.5, 2.0}) {
    FactoredObjective g = FactoredObjective::factorization(gtp, mu);
    double bound = std::min(mu / 4.0, 0.125) * gram_gap;
    double value = g.value(w);
    double scale = std::max(1.0, value);
    worst = std::min(worst, (value - bound) / scale);
  }
  return worst;
}

// Pair (A, B) with A^T B = B^T A PSD and ||A - B|| <= (sqrt(2)/2) sigma_r(B).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> aligned_pair(Rng& rng, int n, int r,
                                                         bool bound_norm) {
  Eigen::VectorXd s(r);
  for (int i = 0; i < r; ++i) s(i) = rng.uniform(0.5, 2.0);
  Eigen::MatrixXd b = rng.random_orthonormal(n, r) * s.asDiagonal() *
                      rng.random_orthogonal(r);
  Eigen::MatrixXd a;
  if (bound_norm) {
    Eigen::JacobiSVD<Eigen::MatrixXd> bs(b);
    double sigma_min = bs.singularValues()(r - 1);
    double radius = rng.uniform(0.0, 0.99) * (std::sqrt(2.0) / 2.0) * sigma_min;
    Eigen::MatrixXd e = rng.sphere_matrix(n, r) * radius;
    a = b + e;
  } else {
    a = rng.gaussian_matrix(n, r);
  }
  Eigen::MatrixXd rot = procrustes_align(a, b).rotation;
  return {a, b * rot};
}

double trial_aligned_gram_inequality(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0x700000 + index);
  int r = 1 + int(rng.uniform(0, 3));
  int n = r + 1 + int(rng.uniform(0, 7));
  auto [a, b] = aligned_pair(rng, n, r, true);
  // Re-check the hypotheses before testing the inequality.
  Eigen::MatrixXd cross = a.transpose() * b;
  if ((cross - cross.transpose()).norm() > tol::derived * (1.0 + cross.norm()))
    throw SamplerError("aligned_gram_inequality: cross Gram not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cross);
  if (eig.eigenvalues()(0) < -tol::derived * (1.0 + cross.norm()))
    throw SamplerError("aligned_gram_inequality: cross Gram not PSD");
  Eigen::JacobiSVD<Eigen::MatrixXd> bs(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> es(a - b);
  if (es.singularValues()(0) >
      (std::sqrt(2.0) / 2.0) * bs.singularValues()(r - 1) * (1.0 + 1e-9))
    throw SamplerError("aligned_gram_inequality: norm hypothesis violated");

  Eigen::MatrixXd e = a - b;
  double lhs = ((a * a.transpose() - b * b.transpose()) * a)
                   .cwiseProduct(e)
                   .sum();
  double term_gram = (e.transpose() * e * b.transpose() * b).trace();
  double term_gap = (a * a.transpose() - b * b.transpose()).squaredNorm();
  double rhs = (term_gram + term_gap) / 16.0;
  double scale = std::max(1.0, std::abs(rhs));
  return (lhs - rhs) / scale;
}

double trial_factor_difference_bound(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0x800000 + index);
  int r = 1 + int(rng.uniform(0, 3));
  int n = r + 1 + int(rng.uniform(0, 7));
  auto [a, b] = aligned_pair(rng, n, r, false);
  double lhs = ((a - b) * a.transpose()).squaredNorm();
  double rhs = (a * a.transpose() - b * b.transpose()).squaredNorm() /
               (2.0 * (std::sqrt(2.0) - 1.0));
  double scale = std::max(1.0, rhs);
  return (rhs - lhs) / scale;
}

struct SensingInstance {
  std::shared_ptr<const GroundTruth> gt;
  std::shared_ptr<const MeasurementOperator> op;
  double c_hat;
};

SensingInstance make_sensing_instance(Rng& rng, std::uint64_t seed,
                                      std::uint64_t index) {
  int n = 6, m = 5, r = 2;
  auto gt = std::make_shared<const GroundTruth>(random_gt(rng, n, m, r));
  int p = 8 * (n + m) * r * r;
  auto op = std::make_shared<const MeasurementOperator>(
      MeasurementOperator::gaussian(n, m, p, seed * 0x9e37 + index));
  LiftedObjective f = sensing_loss(op, op->apply(gt->xstar()));
  SmoothnessEstimate est =
      restricted_convexity_probe(f, n, m, r, 4 * r, 200, seed + index);
  return {gt, op, est.c_hat};
}

double trial_restricted_gradient_consistency(std::uint64_t seed,
                                             std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0x900000 + index);
  SensingInstance inst = make_sensing_instance(rng, seed, index);
  int n = inst.gt->n(), m = inst.gt->m(), r = inst.gt->r_model();
  LiftedObjective f = sensing_loss(inst.op, inst.op->apply(inst.gt->xstar()));
  auto low_rank = [&](int rank) {
    Eigen::MatrixXd x = rng.gaussian_matrix(n, rank) *
                        rng.gaussian_matrix(m, rank).transpose();
    return x;
  };
  Eigen::MatrixXd c = low_rank(r), d = low_rank(r), h = low_rank(2 * r);
  double lhs = std::abs(
      (f.gradient(c) - f.gradient(d) - (c - d)).cwiseProduct(h).sum());
  double rhs = 2.0 * inst.c_hat * (c - d).norm() * h.norm();
  double scale = std::max(1.0, rhs);
  return (rhs - lhs) / scale;
}

double trial_gradient_deviation_bound(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0xa00000 + index);
  SensingInstance inst = make_sensing_instance(rng, seed, index);
  int n = inst.gt->n(), m = inst.gt->m(), r = inst.gt->r_model();
  FactoredObjective g = FactoredObjective::factorization(inst.gt, 0.5);
  FactoredObjective gs = FactoredObjective::sensing(inst.gt, inst.op, 0.5);
  double scale_w = rng.uniform(0.3, 2.0);
  FactoredPoint w(scale_w * rng.gaussian_matrix(n, r),
                  scale_w * rng.gaussian_matrix(m, r));
  FactoredPoint dg = g.gradient(w), ds = gs.gradient(w);
  double dev = std::sqrt((ds.U - dg.U).squaredNorm() + (ds.V - dg.V).squaredNorm());
  Eigen::MatrixXd ws = w.stacked(), os = inst.gt->optimum().stacked();
  double gram_gap = (ws * ws.transpose() - os * os.transpose()).norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ws);
  double rhs = 2.0 * inst.c_hat * gram_gap * svd.singularValues()(0);
  double scale = std::max(1.0, rhs);
  return (rhs - dev) / scale;
}

double trial_hessian_deviation_bound(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0xb00000 + index);
  SensingInstance inst = make_sensing_instance(rng, seed, index);
  int n = inst.gt->n(), m = inst.gt->m(), r = inst.gt->r_model();
  FactoredObjective g = FactoredObjective::factorization(inst.gt, 0.5);
  FactoredObjective gs = FactoredObjective::sensing(inst.gt, inst.op, 0.5);
  double scale_w = rng.uniform(0.3, 2.0);
  FactoredPoint w(scale_w * rng.gaussian_matrix(n, r),
                  scale_w * rng.gaussian_matrix(m, r));
  FactoredPoint d(rng.gaussian_matrix(n, r), rng.gaussian_matrix(m, r));
  double dev = std::abs(gs.hess_quadratic(w, d) - g.hess_quadratic(w, d));
  double resid = (w.product() - inst.gt->xstar()).norm();
  double cross = (d.U * d.V.transpose()).norm();
  double lifted = (d.U * w.V.transpose() + w.U * d.V.transpose()).squaredNorm();
  double rhs = 2.0 * inst.c_hat * (2.0 * resid * cross + lifted);
  double scale = std::max(1.0, rhs);
  return (rhs - dev) / scale;
}

double trial_quadratic_growth_at_optimum(std::uint64_t seed,
                                         std::uint64_t index) {
  Rng rng = Rng::stream(seed, 0xc00000 + index);
  int r = 1 + int(rng.uniform(0, 3));
  int n = r + 1 + int(rng.uniform(0, 4));
  int m = r + 1 + int(rng.uniform(0, 4));
  GroundTruth gt = random_gt(rng, n, m, r);
  Eigen::MatrixXd xstar = gt.xstar();
  double worst = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd omega(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) omega(i, j) = rng.uniform(0.5, 2.0);
  double a_weighted = omega.array().square().minCoeff();

  struct Plugin { LiftedObjective f; double a; };
  Plugin plugins[] = {{quadratic_loss(xstar), 1.0},
                      {hadamard_weighted_loss(omega, xstar), a_weighted}};
  for (auto& pl : plugins) {
    Eigen::MatrixXd x = rng.gaussian_matrix(n, r) *
                        rng.gaussian_matrix(m, r).transpose();
    double growth = pl.f.value(x) - pl.f.value(xstar);
    double rhs = 0.5 * pl.a * (x - xstar).squaredNorm();
    double scale = std::max(1.0, rhs);
    worst = std::min(worst, (growth - rhs) / scale);
  }
  return worst;
}

const std::map<std::string, TrialFn>& property_table() {
  static const std::map<std::string, TrialFn> table = {
      {"psd_trace_bound", trial_psd_trace_bound},
      {"product_frobenius_bound", trial_product_frobenius_bound},
      {"balanced_energy_identity", trial_balanced_energy_identity},
      {"balanced_regularizer_psd", trial_balanced_regularizer_psd},
      {"gap_decomposition_identity", trial_gap_decomposition_identity},
      {"gap_lower_bound", trial_gap_lower_bound},
      {"aligned_gram_inequality", trial_aligned_gram_inequality},
      {"factor_difference_bound", trial_factor_difference_bound},
      {"restricted_gradient_consistency", trial_restricted_gradient_consistency},
      {"gradient_deviation_bound", trial_gradient_deviation_bound},
      {"hessian_deviation_bound", trial_hessian_deviation_bound},
      {"quadratic_growth_at_optimum", trial_quadratic_growth_at_optimum},
  };
  return table;
}

}  // namespace

std::vector<std::string> property_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, fn] : property_table()) ids.push_back(id);
  return ids;
}

double run_property_trial(const std::string& id, std::uint64_t seed,
                          std::uint64_t index) {
  auto it = property_table().find(id);
  if (it == property_table().end())
    throw ValidationError("unknown property id: " + id);
  return it->second(seed, index);
}

std::vector<PropertyReport> property_suite(std::uint64_t seed, int trials) {
  if (trials < 1) throw ValidationError("property_suite: trials must be >= 1");
  std::vector<PropertyReport> reports;
  for (const auto& [id, fn] : property_table()) {
    PropertyReport rep{id, trials, 0, std::numeric_limits<double>::infinity(), 0};
    for (int t = 0; t < trials; ++t) {
      double margin = fn(seed, t);
      if (margin < -tol::derived) ++rep.failures;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_index = t;
      }
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace lowrank
