#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "lowrank/constants.hpp"
#include "lowrank/factored.hpp"
#include "lowrank/matrix_function.hpp"
#include "lowrank/objectives.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

// ---------------------------------------------------------------------------
// Region classification.

enum class RegionLabel { R1, R2, R3a, R3b, R3c };

std::string to_string(RegionLabel label);

struct RegionSet {
  bool r1 = false, r2 = false, r3a = false, r3b = false, r3c = false;

  bool contains(RegionLabel l) const;
  bool empty() const { return !(r1 || r2 || r3a || r3b || r3c); }
  std::vector<RegionLabel> labels() const;
};

/// Scale quantities of a point used by the classifier and certificates.
struct PointScales {
  double distance;      // dist(W, W*)
  double sigma_min;     // smallest singular value of W
  double spectral;      // ||W||
  double gram_fro;      // ||W W^T||_F
};

PointScales point_scales(const FactoredPoint& w, const GroundTruth& gt);

/// All labels whose defining inequalities the point satisfies.  Requires an
/// exactly parameterized ground truth.
RegionSet classify_regions(const FactoredPoint& w, const GroundTruth& gt);

// ---------------------------------------------------------------------------
// Certificates.

const CertificateConstants& certificate_constants(ObjectiveKind kind);

struct RegularityCheck {
  double lhs;        // <grad, W - W* R>
  double rhs;        // alpha dist^2 + beta ||grad||^2
  double alpha;
  double beta;
  double distance;
  double grad_norm;
  bool passed;
};

/// Local regularity inequality at W against the aligned optimum.
RegularityCheck check_regularity(const FactoredObjective& obj,
                                 const FactoredPoint& w, const GroundTruth& gt);

/// Negative-curvature direction for points with small sigma_min(W):
/// Delta = q alpha^T where q spans the least-excited singular direction of
/// the projection of W onto the optimum's column space and alpha is the
/// bottom eigenvector of W^T W.  Unit Frobenius norm.
FactoredPoint negative_direction(const FactoredPoint& w, const GroundTruth& gt);

struct CurvatureCheck {
  double quad_form;  // Hessian form along the constructed direction
  double bound;      // -curvature_constant * sigma_r
  bool passed;
};

CurvatureCheck check_curvature(const FactoredObjective& obj,
                               const FactoredPoint& w, const GroundTruth& gt);

struct GradientCheck {
  RegionLabel label;
  double grad_norm;
  double threshold;
  bool passed;
};

/// Large-gradient inequality for every R3 label the point carries.
std::vector<GradientCheck> check_large_gradient(const FactoredObjective& obj,
                                                const FactoredPoint& w,
                                                const GroundTruth& gt,
                                                const RegionSet& labels);

struct GeometryCertificate {
  RegionSet labels;
  PointScales scales;
  std::optional<RegularityCheck> regularity;
  std::optional<CurvatureCheck> curvature;
  std::vector<GradientCheck> gradient;
  bool all_passed() const;
  /// One JSON object per point (JSON-lines record).
  std::string to_json_line(int index, const std::string& objective_name) const;
};

/// Runs every certificate applicable to the point's labels.
GeometryCertificate certify_point(const FactoredObjective& obj,
                                  const FactoredPoint& w, const GroundTruth& gt);

/// Deviation gates under which the sensing certificate constants are backed
/// by theory; c_hat is compared against each.
struct SensingGates {
  double regularity_threshold;
  double curvature_threshold;
  double gradient_threshold;
  bool regularity_ok;
  bool curvature_ok;
  bool gradient_ok;
  bool all_ok() const { return regularity_ok && curvature_ok && gradient_ok; }
};

SensingGates sensing_gates(double c_hat, const GroundTruth& gt);

// ---------------------------------------------------------------------------
// Eigenvalue machinery.

struct EigResult {
  double lambda_min;
  Eigen::MatrixXd direction;  // same shape as the variable, unit Frobenius
  int iterations;
  bool dense;  // true when computed by dense eigendecomposition
};

/// Dense Hessian of `fn` at `at`, assembled column-by-column from
/// Hessian-vector products and symmetrized.
Eigen::MatrixXd dense_hessian(const MatrixFunction& fn, const Eigen::MatrixXd& at);

/// Smallest Hessian eigenpair.  Dense eigendecomposition up to
/// `cap::dense_hessian_dim` variables, shifted power iteration beyond
/// (throws ConvergenceError with the best estimate when the budget runs out).
EigResult min_hessian_eig(const MatrixFunction& fn, const Eigen::MatrixXd& at,
                          std::uint64_t seed = 0,
                          int iteration_budget = cap::power_iteration_budget);

// ---------------------------------------------------------------------------
// Critical points of the factorization objective.

struct CriticalPoint {
  FactoredPoint point;
  std::vector<int> selected;  // indices into the spectrum (0-based), sorted
  Eigen::MatrixXd rotation;   // the l×r row-orthonormal factor used
  bool is_global_min;
  /// Certified upper bound on lambda_min(Hessian) for saddles, 0 for minima.
  double curvature_bound;
};

/// Critical point with spectrum entries `selected` switched on.  `rotation`
/// must be l×r with orthonormal rows, l = |selected|; pass an empty matrix
/// for the canonical choice.
CriticalPoint build_critical_point(const GroundTruth& gt,
                                   const std::vector<int>& selected,
                                   const Eigen::MatrixXd& rotation = {});

/// All critical points: every spectrum subset in the exact- and
/// over-parameterized regimes, every subset of size <= r when
/// under-parameterized.  Throws ResourceError above the enumeration cap and
/// DomainError when the under-parameterized optimum is not unique.
std::vector<CriticalPoint> enumerate_critical_points(const GroundTruth& gt);

struct SaddleAudit {
  bool is_saddle;
  double quad_form;       // Hessian form along the constructed direction
  double rayleigh;        // quad_form / ||Delta||_F^2
  double expected_rayleigh;
  double lambda_min_bound;  // the certified upper bound on lambda_min
  double flat_form_max;   // max |form| over the rotational flat directions
  bool passed;
};

/// Checks the explicit saddle direction (for saddles) or the rotational
/// flat directions (for global minima) of a critical point of g.
SaddleAudit strict_saddle_audit(const CriticalPoint& cp, const GroundTruth& gt,
                                double mu = 0.5);

// ---------------------------------------------------------------------------
// Region samplers.

/// Draws a point whose labels contain `label`, by per-region proposal
/// distributions with rejection.  Throws SamplerError past the budget.
FactoredPoint sample_region(RegionLabel label, const GroundTruth& gt, Rng& rng,
                            int budget = cap::sampler_budget);

}  // namespace lowrank
