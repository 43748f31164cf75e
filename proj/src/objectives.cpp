#include "lowrank/objectives.hpp"

#include <cmath>

#include "lowrank/constants.hpp"
#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

void require_positive_mu(double mu) {
  if (!(mu > 0)) throw ValidationError("regularizer weight mu must be > 0");
}

}  // namespace

// --------------------------------------------------------------------------
// Regularizer.

double regularizer_value(const FactoredPoint& w, double mu) {
  require_positive_mu(mu);
  Eigen::MatrixXd gap = w.U.transpose() * w.U - w.V.transpose() * w.V;
  return 0.25 * mu * gap.squaredNorm();
}

FactoredPoint regularizer_gradient(const FactoredPoint& w, double mu) {
  require_positive_mu(mu);
  Eigen::MatrixXd gap = w.U.transpose() * w.U - w.V.transpose() * w.V;
  return FactoredPoint(mu * w.U * gap, -mu * w.V * gap);
}

double regularizer_hess_quadratic(const FactoredPoint& w, const FactoredPoint& d,
                                  double mu) {
  require_positive_mu(mu);
  Eigen::MatrixXd gap = w.U.transpose() * w.U - w.V.transpose() * w.V;
  Eigen::MatrixXd hat_cross =
      d.U.transpose() * d.U - d.V.transpose() * d.V;  // hat(D)^T D
  Eigen::MatrixXd a = w.U.transpose() * d.U - w.V.transpose() * d.V;  // hat(W)^T D
  return mu * (gap.cwiseProduct(hat_cross).sum() + (a * a).trace() +
               a.squaredNorm());
}

FactoredPoint regularizer_hess_vec(const FactoredPoint& w, const FactoredPoint& d,
                                   double mu) {
  require_positive_mu(mu);
  Eigen::MatrixXd gap = w.U.transpose() * w.U - w.V.transpose() * w.V;
  Eigen::MatrixXd a = w.U.transpose() * d.U - w.V.transpose() * d.V;
  Eigen::MatrixXd sym = a + a.transpose();
  return FactoredPoint(mu * (d.U * gap + w.U * sym),
                       -mu * (d.V * gap + w.V * sym));
}

// --------------------------------------------------------------------------
// Lifted plugins.

LiftedObjective quadratic_loss(Eigen::MatrixXd xstar) {
  auto x0 = std::make_shared<Eigen::MatrixXd>(std::move(xstar));
  LiftedObjective f;
  f.value = [x0](const Eigen::MatrixXd& x) {
    return 0.5 * (x - *x0).squaredNorm();
  };
  f.gradient = [x0](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return x - *x0;
  };
  f.hessian_bilinear = [](const Eigen::MatrixXd&, const Eigen::MatrixXd& d,
                          const Eigen::MatrixXd& h) {
    return d.cwiseProduct(h).sum();
  };
  f.hessian_apply = [](const Eigen::MatrixXd&, const Eigen::MatrixXd& d) {
    return d;
  };
  return f;
}

LiftedObjective sensing_loss(std::shared_ptr<const MeasurementOperator> op,
                             Eigen::VectorXd y) {
  if (y.size() != op->p()) throw DimensionError("sensing_loss: |y| != p");
  auto y0 = std::make_shared<Eigen::VectorXd>(std::move(y));
  LiftedObjective f;
  f.value = [op, y0](const Eigen::MatrixXd& x) {
    return 0.5 * (op->apply(x) - *y0).squaredNorm();
  };
  f.gradient = [op, y0](const Eigen::MatrixXd& x) {
    return op->adjoint(op->apply(x) - *y0);
  };
  f.hessian_bilinear = [op](const Eigen::MatrixXd&, const Eigen::MatrixXd& d,
                            const Eigen::MatrixXd& h) {
    return op->apply(d).dot(op->apply(h));
  };
  f.hessian_apply = [op](const Eigen::MatrixXd&, const Eigen::MatrixXd& d) {
    return op->adjoint(op->apply(d));
  };
  return f;
}

LiftedObjective hadamard_weighted_loss(Eigen::MatrixXd omega,
                                       Eigen::MatrixXd xstar) {
  if (omega.rows() != xstar.rows() || omega.cols() != xstar.cols())
    throw DimensionError("hadamard_weighted_loss: shape mismatch");
  if ((omega.array() <= 0).any())
    throw ValidationError("hadamard_weighted_loss: weights must be positive");
  auto w2 = std::make_shared<Eigen::MatrixXd>(omega.cwiseProduct(omega));
  auto om = std::make_shared<Eigen::MatrixXd>(std::move(omega));
  auto x0 = std::make_shared<Eigen::MatrixXd>(std::move(xstar));
  LiftedObjective f;
  f.value = [om, x0](const Eigen::MatrixXd& x) {
    return 0.5 * om->cwiseProduct(x - *x0).squaredNorm();
  };
  f.gradient = [w2, x0](const Eigen::MatrixXd& x) {
    return w2->cwiseProduct(x - *x0);
  };
  f.hessian_bilinear = [w2](const Eigen::MatrixXd&, const Eigen::MatrixXd& d,
                            const Eigen::MatrixXd& h) {
    return w2->cwiseProduct(d).cwiseProduct(h).sum();
  };
  f.hessian_apply = [w2](const Eigen::MatrixXd&, const Eigen::MatrixXd& d) {
    return w2->cwiseProduct(d);
  };
  return f;
}

// --------------------------------------------------------------------------
// Factored objective handle.

FactoredObjective::FactoredObjective(ObjectiveKind kind, double mu, int n, int m,
                                     int r)
    : kind_(kind), mu_(mu), n_(n), m_(m), r_(r) {
  require_positive_mu(mu);
  if (n < 1 || m < 1 || r < 1)
    throw ValidationError("FactoredObjective: dimensions must be >= 1");
}

FactoredObjective FactoredObjective::factorization(
    std::shared_ptr<const GroundTruth> gt, double mu) {
  FactoredObjective obj(ObjectiveKind::factorization, mu, gt->n(), gt->m(),
                        gt->r_model());
  obj.gt_ = std::move(gt);
  return obj;
}

FactoredObjective FactoredObjective::general(LiftedObjective f, int n, int m,
                                             int r, double mu) {
  if (!f.value || !f.gradient || !f.hessian_bilinear)
    throw ValidationError("general: plugin must provide value, gradient, "
                          "and hessian_bilinear");
  FactoredObjective obj(ObjectiveKind::general, mu, n, m, r);
  obj.f_ = std::move(f);
  return obj;
}

FactoredObjective FactoredObjective::sensing(
    std::shared_ptr<const GroundTruth> gt,
    std::shared_ptr<const MeasurementOperator> op, double mu) {
  if (op->n() != gt->n() || op->m() != gt->m())
    throw DimensionError("sensing: operator/ground-truth shape mismatch");
  FactoredObjective obj(ObjectiveKind::sensing, mu, gt->n(), gt->m(),
                        gt->r_model());
  obj.f_ = sensing_loss(op, op->apply(gt->xstar()));
  obj.gt_ = std::move(gt);
  obj.op_ = std::move(op);
  return obj;
}

void FactoredObjective::check_shape(const FactoredPoint& w) const {
  if (w.n() != n_ || w.m() != m_ || w.r() != r_)
    throw DimensionError("FactoredObjective: point has wrong shape");
}

double FactoredObjective::value(const FactoredPoint& w) const {
  check_shape(w);
  double rho = regularizer_value(w, mu_);
  if (kind_ == ObjectiveKind::factorization)
    return 0.5 * (w.product() - gt_->xstar()).squaredNorm() + rho;
  return f_.value(w.product()) + rho;
}

FactoredPoint FactoredObjective::gradient(const FactoredPoint& w) const {
  check_shape(w);
  FactoredPoint rho = regularizer_gradient(w, mu_);
  Eigen::MatrixXd grad_x;  // ∇f at U V^T
  if (kind_ == ObjectiveKind::factorization)
    grad_x = w.product() - gt_->xstar();
  else
    grad_x = f_.gradient(w.product());
  return FactoredPoint(grad_x * w.V + rho.U, grad_x.transpose() * w.U + rho.V);
}

double FactoredObjective::hess_quadratic(const FactoredPoint& w,
                                         const FactoredPoint& d) const {
  check_shape(w);
  Eigen::MatrixXd lifted_dir = d.U * w.V.transpose() + w.U * d.V.transpose();
  Eigen::MatrixXd cross = d.U * d.V.transpose();
  double quad_f;
  double cross_f;
  if (kind_ == ObjectiveKind::factorization) {
    Eigen::MatrixXd residual = w.product() - gt_->xstar();
    quad_f = lifted_dir.squaredNorm();
    cross_f = residual.cwiseProduct(cross).sum();
  } else {
    Eigen::MatrixXd x = w.product();
    quad_f = f_.hessian_bilinear(x, lifted_dir, lifted_dir);
    cross_f = f_.gradient(x).cwiseProduct(cross).sum();
  }
  return quad_f + 2.0 * cross_f + regularizer_hess_quadratic(w, d, mu_);
}

FactoredPoint FactoredObjective::hess_vec(const FactoredPoint& w,
                                          const FactoredPoint& d) const {
  check_shape(w);
  Eigen::MatrixXd lifted_dir = d.U * w.V.transpose() + w.U * d.V.transpose();
  Eigen::MatrixXd grad_x, hess_x;
  if (kind_ == ObjectiveKind::factorization) {
    grad_x = w.product() - gt_->xstar();
    hess_x = lifted_dir;
  } else {
    Eigen::MatrixXd x = w.product();
    grad_x = f_.gradient(x);
    if (f_.hessian_apply) {
      hess_x = f_.hessian_apply(x, lifted_dir);
    } else {
      // Central differences of the plugin gradient along the direction.
      double step = std::cbrt(std::numeric_limits<double>::epsilon()) *
                    (1.0 + x.norm()) / std::max(lifted_dir.norm(), 1e-300);
      hess_x = (f_.gradient(x + step * lifted_dir) -
                f_.gradient(x - step * lifted_dir)) /
               (2.0 * step);
    }
  }
  FactoredPoint rho = regularizer_hess_vec(w, d, mu_);
  return FactoredPoint(hess_x * w.V + grad_x * d.V + rho.U,
                       hess_x.transpose() * w.U + grad_x.transpose() * d.U + rho.V);
}

double FactoredObjective::value(const Eigen::MatrixXd& w) const {
  return value(split(w));
}

Eigen::MatrixXd FactoredObjective::gradient(const Eigen::MatrixXd& w) const {
  return gradient(split(w)).stacked();
}

double FactoredObjective::hess_quadratic(const Eigen::MatrixXd& w,
                                         const Eigen::MatrixXd& d) const {
  return hess_quadratic(split(w), split(d));
}

Eigen::MatrixXd FactoredObjective::hess_vec(const Eigen::MatrixXd& w,
                                            const Eigen::MatrixXd& d) const {
  return hess_vec(split(w), split(d)).stacked();
}

// --------------------------------------------------------------------------
// Symmetric weighted PCA.

SymmetricWeightedPca::SymmetricWeightedPca(Eigen::MatrixXd omega,
                                           Eigen::MatrixXd xstar)
    : omega_(std::move(omega)), xstar_(std::move(xstar)) {
  if (omega_.rows() != omega_.cols())
    throw DimensionError("SymmetricWeightedPca: Omega must be square");
  if (xstar_.rows() != omega_.rows() || xstar_.cols() != omega_.cols())
    throw DimensionError("SymmetricWeightedPca: Xstar/Omega shape mismatch");
  if ((omega_.array() <= 0).any())
    throw ValidationError("SymmetricWeightedPca: weights must be positive");
  omega_sq_ = omega_.cwiseProduct(omega_);
}

double SymmetricWeightedPca::value(const Eigen::MatrixXd& u) const {
  return 0.5 * omega_.cwiseProduct(u * u.transpose() - xstar_).squaredNorm();
}

Eigen::MatrixXd SymmetricWeightedPca::gradient(const Eigen::MatrixXd& u) const {
  Eigen::MatrixXd weighted =
      omega_sq_.cwiseProduct(u * u.transpose() - xstar_);
  return (weighted + weighted.transpose()) * u;
}

double SymmetricWeightedPca::hess_quadratic(const Eigen::MatrixXd& u,
                                            const Eigen::MatrixXd& d) const {
  return hess_vec(u, d).cwiseProduct(d).sum();
}

Eigen::MatrixXd SymmetricWeightedPca::hess_vec(const Eigen::MatrixXd& u,
                                               const Eigen::MatrixXd& d) const {
  Eigen::MatrixXd sym_dir = d * u.transpose() + u * d.transpose();
  Eigen::MatrixXd wd = omega_sq_.cwiseProduct(sym_dir);
  Eigen::MatrixXd we = omega_sq_.cwiseProduct(u * u.transpose() - xstar_);
  return (wd + wd.transpose()) * u + (we + we.transpose()) * d;
}

// --------------------------------------------------------------------------
// Convexity probe.

namespace {

Eigen::MatrixXd random_low_rank(Rng& rng, int n, int m, int rank) {
  Eigen::MatrixXd out = rng.gaussian_matrix(n, rank) *
                        rng.gaussian_matrix(m, rank).transpose();
  double norm = out.norm();
  return norm > 0 ? Eigen::MatrixXd(out / norm) : out;
}

}  // namespace

SmoothnessEstimate restricted_convexity_probe(const LiftedObjective& f, int n,
                                              int m, int r, int rank_dir,
                                              int trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("probe: trials must be >= 1");
  if (rank_dir < 1) throw ValidationError("probe: rank_dir must be >= 1");
  double a_hat = std::numeric_limits<double>::infinity();
  double b_hat = -a_hat;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, t);
    Eigen::MatrixXd x = random_low_rank(rng, n, m, std::min(2 * r, std::min(n, m)));
    Eigen::MatrixXd d = random_low_rank(rng, n, m, std::min(rank_dir, std::min(n, m)));
    double ratio = f.hessian_bilinear(x, d, d);
    a_hat = std::min(a_hat, ratio);
    b_hat = std::max(b_hat, ratio);
  }
  if (!(a_hat > 0))
    throw ValidationError("probe: sampled curvature not strictly positive");
  return {a_hat, b_hat, (b_hat - a_hat) / (a_hat + b_hat), trials};
}

}  // namespace lowrank
