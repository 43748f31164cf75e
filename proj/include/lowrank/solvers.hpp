#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "lowrank/constants.hpp"
#include "lowrank/matrix_function.hpp"

namespace lowrank {

/// Saddle-escape noise: a kick of the given Frobenius radius is added
/// whenever the gradient norm falls to or below the trigger.
struct NoiseConfig {
  double radius = 0.0;
  double trigger = 0.0;
};

struct SolverConfig {
  double step_size = 0.0;  // 0 = choose automatically at W0
  int max_iters = 10000;
  double grad_tol = 1e-10;
  NoiseConfig noise;
  std::uint64_t seed = 0;
  int stride = solver::default_stride;  // decimation; first/last always kept
  double divergence_factor = solver::divergence_factor;
};

enum class Termination { grad_tol, max_iters, diverged };

std::string to_string(Termination t);

struct TrajectorySample {
  int iter;
  Eigen::MatrixXd point;
  double value;
  double grad_norm;
  double dist;  // NaN when no distance callback was given
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Termination reason;
  int iterations;
  double step_size;

  const TrajectorySample& last() const { return samples.back(); }
  double min_value() const;
  /// CSV with header iter,value,grad_norm,dist.
  void write_csv(std::ostream& os) const;
};

using DistanceFn = std::function<double(const Eigen::MatrixXd&)>;

/// Plain gradient descent w_{t+1} = w_t - nu * grad(w_t).
Trajectory gradient_descent(const MatrixFunction& fn, const Eigen::MatrixXd& w0,
                            const SolverConfig& config,
                            const DistanceFn& distance = {});

/// Gradient descent plus a uniform random sphere kick when the gradient is
/// small; identical to gradient_descent when the radius is zero.
Trajectory perturbed_gradient_descent(const MatrixFunction& fn,
                                      const Eigen::MatrixXd& w0,
                                      const SolverConfig& config,
                                      const DistanceFn& distance = {});

struct RateAudit {
  int flagged_steps;      // recorded gaps exceeding the contraction bound
  double worst_excess;    // worst ratio overshoot over the bound
  bool stayed_in_ball;    // every recorded dist <= ball_radius
  int steps_checked;
};

/// Audits dist^2 contraction at rate (1 - 2 nu alpha) per iteration across
/// the recorded samples (gap-aware for decimated trajectories) and checks
/// the trajectory never left the ball.
RateAudit rate_audit(const Trajectory& traj, double alpha, double nu,
                     double ball_radius);

/// Step size min(2*beta, 1/(4*||Hessian at w0||)) with the Hessian norm
/// estimated by power iteration.  Pass beta <= 0 when no regularity constant
/// is known; the Lipschitz cap is then used alone.
double default_step_size(const MatrixFunction& fn, const Eigen::MatrixXd& w0,
                         double beta);

}  // namespace lowrank
