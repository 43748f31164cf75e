#pragma once

// Central table of tolerances, landscape constants, and resource caps.
// Every numeric threshold used by the library and its test suites is
// defined here exactly once.

namespace lowrank {

namespace tol {

/// Structural invariants (orthonormality, reconstruction, round trips).
inline constexpr double structural = 1e-12;

/// Derived-quantity comparisons (identities, certificate margins).
inline constexpr double derived = 1e-10;

/// First-order finite-difference agreement, relative.
inline constexpr double fd_gradient = 1e-6;

/// Second-order finite-difference agreement, relative.
inline constexpr double fd_hessian = 1e-4;

/// Relative tolerance of the iterative smallest-eigenvalue solver.
inline constexpr double eig_iterative = 1e-8;

/// Agreement between a returned eigen-direction and its eigenvalue.
inline constexpr double eig_direction = 1e-6;

}  // namespace tol

namespace region {

// Region boundary factors. R1 is the ball dist <= sqrt(sigma_r); R2 caps
// sigma_r(W) by sqrt(1/2)*sqrt(sigma_r); the spectral seam between the
// bounded and unbounded gradient regions sits at (20/19)*||Wopt||, and the
// Gram-Frobenius seam at (10/9)*||Wopt Wopt^T||_F.  The (10/9) cap is also
// applied to the rank-deficient and bounded-gradient regions so that the
// five regions provably cover the whole space.
inline constexpr double r1_radius_factor = 1.0;                   // × sqrt(sigma_r)
inline constexpr double r2_sigma_factor = 0.70710678118654752440; // sqrt(1/2)
inline constexpr double spectral_cap = 20.0 / 19.0;               // × ||Wopt||
inline constexpr double gram_fro_cap = 10.0 / 9.0;                // × ||Wopt Wopt^T||_F

}  // namespace region

/// Certificate constants for one objective family.
struct CertificateConstants {
  double regularity_alpha;  // × sigma_r(Xstar)
  double regularity_beta;   // ÷ ||Xstar||
  double curvature;         // quadratic form <= -curvature × sigma_r
  double grad_r3a;          // × sigma_r^{3/2}
  double grad_r3b;          // × ||W||^3
  double grad_r3c;          // × ||W W^T||_F^{3/2}
};

/// Constants certified for the plain factorization objective (mu = 1/2).
inline constexpr CertificateConstants kFactorizationConstants{
    1.0 / 32.0, 1.0 / 48.0, 1.0 / 4.0, 1.0 / 10.0, 39.0 / 800.0, 1.0 / 20.0};

/// Constants certified for restricted-strongly-convex objectives
/// (sensing and general plugins, mu = 1/2).
inline constexpr CertificateConstants kSensingConstants{
    1.0 / 16.0, 1.0 / 260.0, 1.0 / 6.0, 1.0 / 27.0, 1.0 / 50.0, 1.0 / 45.0};

namespace gate {

// Convexity-deviation gates under which the sensing certificates are
// proved.  c_hat must stay below these for the corresponding certificate
// constant to be backed by theory.
inline constexpr double regularity = 1.0 / 50.0;        // absolute on c
inline constexpr double curvature_factor = 1.0 / 50.0;  // × sigma_r / ||Xstar||_F
inline constexpr double gradient_factor = 1.0 / 100.0;  // × sigma_r^{3/2}/(||Xstar||_F ||Xstar||^{1/2})

}  // namespace gate

namespace cap {

/// Largest (n+m)*r for which the Hessian is assembled densely.
inline constexpr int dense_hessian_dim = 400;

/// Largest rank for which critical points are enumerated (2^r masks).
inline constexpr int enumeration_rank = 12;

/// Largest ensemble size p*n*m held in memory.
inline constexpr long long ensemble_scalars = 20'000'000;

/// Rejection-sampler proposal budget per requested point.
inline constexpr int sampler_budget = 100'000;

/// Iteration budget of the shifted power iteration.
inline constexpr int power_iteration_budget = 200'000;

}  // namespace cap

namespace solver {

/// Value blow-up factor that triggers the divergence guard.
inline constexpr double divergence_factor = 1e6;

/// Default trajectory decimation stride.
inline constexpr int default_stride = 10;

/// Default saddle-escape noise: kick radius and gradient trigger.
inline constexpr double default_noise_radius = 1e-4;
inline constexpr double default_noise_trigger = 1e-5;

}  // namespace solver

}  // namespace lowrank
