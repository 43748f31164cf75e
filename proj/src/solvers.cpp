#include "lowrank/solvers.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "lowrank/errors.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::grad_tol: return "grad_tol";
    case Termination::max_iters: return "max_iters";
    case Termination::diverged: return "diverged";
  }
  return "?";
}

double Trajectory::min_value() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) best = std::min(best, s.value);
  return best;
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "iter,value,grad_norm,dist\n";
  char buf[128];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", s.iter, s.value,
                  s.grad_norm, s.dist);
    os << buf;
  }
}

namespace {

Trajectory descend(const MatrixFunction& fn, const Eigen::MatrixXd& w0,
                   const SolverConfig& config, const DistanceFn& distance,
                   bool with_noise) {
  if (config.max_iters < 0) throw ValidationError("solver: max_iters < 0");
  if (config.stride < 1) throw ValidationError("solver: stride must be >= 1");
  if (config.noise.radius < 0 || config.noise.trigger < 0)
    throw ValidationError("solver: noise radii must be nonnegative");

  double nu = config.step_size;
  if (nu == 0.0) nu = default_step_size(fn, w0, 0.0);
  if (!(nu > 0)) throw ValidationError("solver: step size must be positive");

  Rng rng = Rng::stream(config.seed, 0x6e01);
  Trajectory traj;
  traj.step_size = nu;
  Eigen::MatrixXd w = w0;
  double value0 = fn.value(w);
  double blowup = config.divergence_factor * (value0 + 1e-9);
  double nan = std::numeric_limits<double>::quiet_NaN();

  auto record = [&](int iter, const Eigen::MatrixXd& point, double value,
                    double grad_norm) {
    traj.samples.push_back(
        {iter, point, value, grad_norm, distance ? distance(point) : nan});
  };

  Eigen::MatrixXd last_finite = w;
  double last_finite_value = value0;
  int last_finite_iter = 0;
  int iter = 0;
  for (;; ++iter) {
    double value = fn.value(w);
    if (!std::isfinite(value) || (iter > 0 && value > blowup)) {
      if (traj.samples.empty() || traj.samples.back().iter != last_finite_iter)
        record(last_finite_iter, last_finite, last_finite_value, nan);
      traj.reason = Termination::diverged;
      break;
    }
    last_finite = w;
    last_finite_value = value;
    last_finite_iter = iter;
    Eigen::MatrixXd grad = fn.gradient(w);
    double grad_norm = grad.norm();
    if (grad_norm <= config.grad_tol) {
      record(iter, w, value, grad_norm);
      traj.reason = Termination::grad_tol;
      break;
    }
    if (iter >= config.max_iters) {
      record(iter, w, value, grad_norm);
      traj.reason = Termination::max_iters;
      break;
    }
    if (iter % config.stride == 0) record(iter, w, value, grad_norm);
    w -= nu * grad;
    if (with_noise && config.noise.radius > 0 &&
        grad_norm <= config.noise.trigger) {
      w += config.noise.radius *
           rng.sphere_matrix(int(w.rows()), int(w.cols()));
    }
  }
  traj.iterations = iter;
  return traj;
}

}  // namespace

Trajectory gradient_descent(const MatrixFunction& fn, const Eigen::MatrixXd& w0,
                            const SolverConfig& config,
                            const DistanceFn& distance) {
  return descend(fn, w0, config, distance, false);
}

Trajectory perturbed_gradient_descent(const MatrixFunction& fn,
                                      const Eigen::MatrixXd& w0,
                                      const SolverConfig& config,
                                      const DistanceFn& distance) {
  return descend(fn, w0, config, distance, true);
}

RateAudit rate_audit(const Trajectory& traj, double alpha, double nu,
                     double ball_radius) {
  RateAudit audit{0, 0.0, true, 0};
  double rate = 1.0 - 2.0 * nu * alpha;
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    double d = traj.samples[i].dist;
    if (std::isnan(d)) throw ValidationError("rate_audit: trajectory has no distances");
    if (d > ball_radius + tol::derived) audit.stayed_in_ball = false;
    if (i == 0) continue;
    int gap = traj.samples[i].iter - traj.samples[i - 1].iter;
    if (gap <= 0) continue;
    double prev_sq = traj.samples[i - 1].dist * traj.samples[i - 1].dist;
    double cur_sq = d * d;
    double bound = std::pow(rate, gap) + tol::derived;
    ++audit.steps_checked;
    // Multiplied-out form avoids 0/0 at convergence.
    if (cur_sq > bound * prev_sq + 1e-300) {
      ++audit.flagged_steps;
      if (prev_sq > 0)
        audit.worst_excess =
            std::max(audit.worst_excess, cur_sq / prev_sq - std::pow(rate, gap));
    }
  }
  return audit;
}

double default_step_size(const MatrixFunction& fn, const Eigen::MatrixXd& w0,
                         double beta) {
  // Power-iteration estimate of the Hessian norm at w0.
  Rng rng(0x11f);
  Eigen::MatrixXd v = rng.sphere_matrix(int(w0.rows()), int(w0.cols()));
  double norm_est = 1e-12;
  for (int it = 0; it < 50; ++it) {
    Eigen::MatrixXd hv = fn.hess_vec(w0, v);
    double n = hv.norm();
    if (n <= 1e-300) break;
    norm_est = n;
    v = hv / n;
  }
  double lipschitz_cap = 1.0 / (4.0 * norm_est);
  if (beta > 0) return std::min(2.0 * beta, lipschitz_cap);
  return lipschitz_cap;
}

}  // namespace lowrank
