#include "lowrank/geometry.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "lowrank/errors.hpp"

namespace lowrank {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Regions.

std::string to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::R1: return "R1";
    case RegionLabel::R2: return "R2";
    case RegionLabel::R3a: return "R3a";
    case RegionLabel::R3b: return "R3b";
    case RegionLabel::R3c: return "R3c";
  }
  return "?";
}

bool RegionSet::contains(RegionLabel l) const {
  switch (l) {
    case RegionLabel::R1: return r1;
    case RegionLabel::R2: return r2;
    case RegionLabel::R3a: return r3a;
    case RegionLabel::R3b: return r3b;
    case RegionLabel::R3c: return r3c;
  }
  return false;
}

std::vector<RegionLabel> RegionSet::labels() const {
  std::vector<RegionLabel> out;
  if (r1) out.push_back(RegionLabel::R1);
  if (r2) out.push_back(RegionLabel::R2);
  if (r3a) out.push_back(RegionLabel::R3a);
  if (r3b) out.push_back(RegionLabel::R3b);
  if (r3c) out.push_back(RegionLabel::R3c);
  return out;
}

namespace {

void require_exact(const GroundTruth& gt, const char* who) {
  if (!gt.exact_parameterized())
    throw DomainError(std::string(who) +
                      ": requires an exactly parameterized ground truth");
}

// The certificate constants are derived only for mu = 1/2.
void require_half_mu(const FactoredObjective& obj, const char* who) {
  if (obj.mu() != 0.5)
    throw ValidationError(std::string(who) +
                          ": certificates require mu = 1/2");
}

}  // namespace

PointScales point_scales(const FactoredPoint& w, const GroundTruth& gt) {
  Eigen::MatrixXd stacked = w.stacked();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const auto& s = svd.singularValues();
  PointScales out;
  out.distance = dist(w, gt.optimum());
  out.sigma_min = s(s.size() - 1);
  out.spectral = s(0);
  out.gram_fro = (stacked.transpose() * stacked).norm();
  return out;
}

RegionSet classify_regions(const FactoredPoint& w, const GroundTruth& gt) {
  require_exact(gt, "classify_regions");
  PointScales sc = point_scales(w, gt);
  double ball = region::r1_radius_factor * std::sqrt(gt.sigma_r());
  double sigma_cap = region::r2_sigma_factor * std::sqrt(gt.sigma_r());
  double spectral_cap = region::spectral_cap * gt.wstar_spectral();
  double gram_cap = region::gram_fro_cap * gt.wstar_gram_fro();
  RegionSet set;
  set.r1 = sc.distance <= ball;
  set.r2 = sc.sigma_min <= sigma_cap && sc.gram_fro <= gram_cap;
  set.r3a = sc.distance > ball && sc.spectral <= spectral_cap &&
            sc.sigma_min > sigma_cap && sc.gram_fro <= gram_cap;
  set.r3b = sc.spectral > spectral_cap && sc.gram_fro <= gram_cap;
  set.r3c = sc.gram_fro > gram_cap;
  return set;
}

// ---------------------------------------------------------------------------
// Certificates.

const CertificateConstants& certificate_constants(ObjectiveKind kind) {
  return kind == ObjectiveKind::factorization ? kFactorizationConstants
                                              : kSensingConstants;
}

RegularityCheck check_regularity(const FactoredObjective& obj,
                                 const FactoredPoint& w, const GroundTruth& gt) {
  require_exact(gt, "check_regularity");
  require_half_mu(obj, "check_regularity");
  const CertificateConstants& cc = certificate_constants(obj.kind());
  FactoredPoint wstar = gt.optimum();
  AlignmentResult align = procrustes_align(w, wstar);
  FactoredPoint aligned = wstar.rotated(align.rotation);
  FactoredPoint grad = obj.gradient(w);
  RegularityCheck out;
  out.alpha = cc.regularity_alpha * gt.sigma_r();
  out.beta = cc.regularity_beta / gt.spectral_norm();
  out.distance = align.distance;
  out.grad_norm = std::sqrt(grad.U.squaredNorm() + grad.V.squaredNorm());
  out.lhs = grad.U.cwiseProduct(w.U - aligned.U).sum() +
            grad.V.cwiseProduct(w.V - aligned.V).sum();
  out.rhs = out.alpha * align.distance * align.distance +
            out.beta * out.grad_norm * out.grad_norm;
  out.passed = out.lhs >= out.rhs - tol::derived;
  return out;
}

FactoredPoint negative_direction(const FactoredPoint& w, const GroundTruth& gt) {
  require_exact(gt, "negative_direction");
  int r = gt.r_model();
  Eigen::MatrixXd stacked = w.stacked();
  double sigma_cap = region::r2_sigma_factor * std::sqrt(gt.sigma_r());
  Eigen::JacobiSVD<Eigen::MatrixXd> wsvd(stacked);
  if (wsvd.singularValues()(r - 1) > sigma_cap * (1.0 + 1e-12))
    throw DomainError("negative_direction: sigma_min(W) above the region bound");

  double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd q(gt.n() + gt.m(), r);
  q.topRows(gt.n()) = inv_sqrt2 * gt.phi();
  q.bottomRows(gt.m()) = inv_sqrt2 * gt.psi();

  // Least-excited direction of the projection of W onto span(Q).
  Eigen::MatrixXd proj = q.transpose() * stacked;
  Eigen::JacobiSVD<Eigen::MatrixXd> psvd(proj, Eigen::ComputeFullU);
  Eigen::VectorXd spine = q * psvd.matrixU().col(r - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(stacked.transpose() * stacked);
  Eigen::VectorXd alpha = gram.eigenvectors().col(0);

  Eigen::MatrixXd delta = spine * alpha.transpose();
  return FactoredPoint::from_stacked(delta, gt.n());
}

CurvatureCheck check_curvature(const FactoredObjective& obj,
                               const FactoredPoint& w, const GroundTruth& gt) {
  require_half_mu(obj, "check_curvature");
  const CertificateConstants& cc = certificate_constants(obj.kind());
  FactoredPoint delta = negative_direction(w, gt);
  CurvatureCheck out;
  out.quad_form = obj.hess_quadratic(w, delta);
  out.bound = -cc.curvature * gt.sigma_r();
  out.passed = out.quad_form <= out.bound + tol::derived;
  return out;
}

std::vector<GradientCheck> check_large_gradient(const FactoredObjective& obj,
                                                const FactoredPoint& w,
                                                const GroundTruth& gt,
                                                const RegionSet& labels) {
  require_half_mu(obj, "check_large_gradient");
  const CertificateConstants& cc = certificate_constants(obj.kind());
  PointScales sc = point_scales(w, gt);
  FactoredPoint grad = obj.gradient(w);
  double gnorm = std::sqrt(grad.U.squaredNorm() + grad.V.squaredNorm());
  std::vector<GradientCheck> out;
  auto add = [&](RegionLabel label, double threshold) {
    out.push_back({label, gnorm, threshold, gnorm >= threshold - tol::derived});
  };
  if (labels.r3a) add(RegionLabel::R3a, cc.grad_r3a * std::pow(gt.sigma_r(), 1.5));
  if (labels.r3b) add(RegionLabel::R3b, cc.grad_r3b * std::pow(sc.spectral, 3.0));
  if (labels.r3c) add(RegionLabel::R3c, cc.grad_r3c * std::pow(sc.gram_fro, 1.5));
  return out;
}

bool GeometryCertificate::all_passed() const {
  if (regularity && !regularity->passed) return false;
  if (curvature && !curvature->passed) return false;
  for (const auto& g : gradient)
    if (!g.passed) return false;
  return true;
}

GeometryCertificate certify_point(const FactoredObjective& obj,
                                  const FactoredPoint& w, const GroundTruth& gt) {
  GeometryCertificate cert;
  cert.labels = classify_regions(w, gt);
  cert.scales = point_scales(w, gt);
  if (cert.labels.r1) cert.regularity = check_regularity(obj, w, gt);
  if (cert.labels.r2) cert.curvature = check_curvature(obj, w, gt);
  cert.gradient = check_large_gradient(obj, w, gt, cert.labels);
  return cert;
}

std::string GeometryCertificate::to_json_line(int index,
                                              const std::string& objective_name) const {
  json j;
  j["index"] = index;
  j["objective"] = objective_name;
  std::vector<std::string> names;
  for (RegionLabel l : labels.labels()) names.push_back(to_string(l));
  j["labels"] = names;
  j["scales"] = {{"dist", scales.distance},
                 {"sigma_min", scales.sigma_min},
                 {"spectral", scales.spectral},
                 {"gram_fro", scales.gram_fro}};
  if (regularity) {
    j["regularity"] = {{"lhs", regularity->lhs},     {"rhs", regularity->rhs},
                       {"alpha", regularity->alpha}, {"beta", regularity->beta},
                       {"grad_norm", regularity->grad_norm},
                       {"passed", regularity->passed}};
  }
  if (curvature) {
    j["curvature"] = {{"form", curvature->quad_form},
                      {"bound", curvature->bound},
                      {"passed", curvature->passed}};
  }
  if (!gradient.empty()) {
    json arr = json::array();
    for (const auto& g : gradient)
      arr.push_back({{"label", to_string(g.label)},
                     {"grad_norm", g.grad_norm},
                     {"threshold", g.threshold},
                     {"passed", g.passed}});
    j["large_gradient"] = arr;
  }
  j["passed"] = all_passed();
  return j.dump();
}

SensingGates sensing_gates(double c_hat, const GroundTruth& gt) {
  SensingGates g;
  g.regularity_threshold = gate::regularity;
  g.curvature_threshold = gate::curvature_factor * gt.sigma_r() / gt.frob_norm();
  g.gradient_threshold = gate::gradient_factor * std::pow(gt.sigma_r(), 1.5) /
                         (gt.frob_norm() * std::sqrt(gt.spectral_norm()));
  g.regularity_ok = c_hat <= g.regularity_threshold;
  g.curvature_ok = c_hat <= g.curvature_threshold;
  g.gradient_ok = c_hat <= g.gradient_threshold;
  return g;
}

// ---------------------------------------------------------------------------
// Eigenvalue machinery.

Eigen::MatrixXd dense_hessian(const MatrixFunction& fn, const Eigen::MatrixXd& at) {
  const Eigen::Index rows = at.rows(), cols = at.cols();
  const Eigen::Index dim = rows * cols;
  Eigen::MatrixXd hess(dim, dim);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index k = 0; k < dim; ++k) {
    basis(k % rows, k / rows) = 1.0;
    Eigen::MatrixXd col = fn.hess_vec(at, basis);
    hess.col(k) = Eigen::Map<const Eigen::VectorXd>(col.data(), dim);
    basis(k % rows, k / rows) = 0.0;
  }
  return 0.5 * (hess + hess.transpose());
}

EigResult min_hessian_eig(const MatrixFunction& fn, const Eigen::MatrixXd& at,
                          std::uint64_t seed, int iteration_budget) {
  const Eigen::Index rows = at.rows(), cols = at.cols();
  const Eigen::Index dim = rows * cols;
  if (dim <= cap::dense_hessian_dim) {
    Eigen::MatrixXd hess = dense_hessian(fn, at);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
    Eigen::MatrixXd dir = Eigen::Map<const Eigen::MatrixXd>(
        eig.eigenvectors().col(0).data(), rows, cols);
    return {eig.eigenvalues()(0), dir, 0, true};
  }

  // Shifted power iteration on c*I - H.
  // TODO: switch to Lanczos with selective reorthogonalization; power
  // iteration needs O(1/gap) products when the bottom eigenvalues cluster.
  Rng rng = Rng::stream(seed, 0x5eed);
  Eigen::MatrixXd v = rng.sphere_matrix(int(rows), int(cols));
  double norm_est = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::MatrixXd hv = fn.hess_vec(at, v);
    norm_est = hv.norm();
    if (norm_est == 0.0) break;
    v = hv / norm_est;
  }
  double shift = 1.1 * norm_est + 1e-8;

  v = rng.sphere_matrix(int(rows), int(cols));
  double rayleigh = 0.0;
  for (int it = 1; it <= iteration_budget; ++it) {
    Eigen::MatrixXd hv = fn.hess_vec(at, v);
    rayleigh = v.cwiseProduct(hv).sum();
    double residual = (hv - rayleigh * v).norm();
    if (residual <= tol::eig_iterative * std::max(1.0, std::abs(rayleigh)))
      return {rayleigh, v, it, false};
    Eigen::MatrixXd next = shift * v - hv;
    double norm = next.norm();
    if (norm == 0.0) return {rayleigh, v, it, false};
    v = next / norm;
  }
  throw ConvergenceError("min_hessian_eig: power iteration budget exhausted",
                         rayleigh);
}

// ---------------------------------------------------------------------------
// Critical points.

CriticalPoint build_critical_point(const GroundTruth& gt,
                                   const std::vector<int>& selected,
                                   const Eigen::MatrixXd& rotation) {
  const int rank = gt.rank();
  const int r = gt.r_model();
  const int max_sel = std::min(rank, r);
  std::vector<int> sel = selected;
  std::sort(sel.begin(), sel.end());
  if (std::adjacent_find(sel.begin(), sel.end()) != sel.end())
    throw ValidationError("build_critical_point: duplicate index");
  for (int i : sel)
    if (i < 0 || i >= rank)
      throw ValidationError("build_critical_point: index out of range");
  const int l = static_cast<int>(sel.size());
  if (l > max_sel)
    throw ValidationError("build_critical_point: too many selected values");
  if (gt.under_parameterized() &&
      gt.sigma()(r - 1) - gt.sigma()(r) <= tol::structural * gt.sigma1())
    throw DomainError("build_critical_point: sigma_r == sigma_{r+1}, "
                      "best approximation not unique");

  Eigen::MatrixXd rot = rotation;
  if (rot.size() == 0) {
    rot = Eigen::MatrixXd::Zero(l, r);
    rot.leftCols(l).setIdentity();
  }
  if (rot.rows() != l || rot.cols() != r)
    throw DimensionError("build_critical_point: rotation must be l×r");
  if ((rot * rot.transpose() - Eigen::MatrixXd::Identity(l, l)).norm() >
      tol::derived)
    throw ValidationError("build_critical_point: rotation rows not orthonormal");

  Eigen::MatrixXd phi_sel(gt.n(), l), psi_sel(gt.m(), l);
  Eigen::VectorXd root(l);
  for (int i = 0; i < l; ++i) {
    phi_sel.col(i) = gt.phi().col(sel[i]);
    psi_sel.col(i) = gt.psi().col(sel[i]);
    root(i) = std::sqrt(gt.sigma()(sel[i]));
  }
  FactoredPoint w(phi_sel * root.asDiagonal() * rot,
                  psi_sel * root.asDiagonal() * rot);

  CriticalPoint cp{std::move(w), sel, rot, false, 0.0};
  if (gt.under_parameterized()) {
    std::vector<int> top(r);
    for (int i = 0; i < r; ++i) top[i] = i;
    cp.is_global_min = (sel == top);
    if (!cp.is_global_min) {
      int first_missing = 0;
      while (std::find(sel.begin(), sel.end(), first_missing) != sel.end())
        ++first_missing;
      double tail = (l == r) ? gt.sigma()(sel.back()) : 0.0;
      cp.curvature_bound = -(gt.sigma()(first_missing) - tail);
    }
  } else {
    cp.is_global_min = (l == rank);
    if (!cp.is_global_min) {
      int first_missing = 0;
      while (std::find(sel.begin(), sel.end(), first_missing) != sel.end())
        ++first_missing;
      cp.curvature_bound = -gt.sigma()(first_missing);
    }
  }
  return cp;
}

std::vector<CriticalPoint> enumerate_critical_points(const GroundTruth& gt) {
  const int rank = gt.rank();
  if (rank > cap::enumeration_rank)
    throw ResourceError("enumerate_critical_points: rank above enumeration cap");
  const int max_sel = std::min(rank, gt.r_model());
  std::vector<CriticalPoint> out;
  for (unsigned mask = 0; mask < (1u << rank); ++mask) {
    std::vector<int> sel;
    for (int i = 0; i < rank; ++i)
      if (mask & (1u << i)) sel.push_back(i);
    if (static_cast<int>(sel.size()) > max_sel) continue;
    out.push_back(build_critical_point(gt, sel));
  }
  return out;
}

SaddleAudit strict_saddle_audit(const CriticalPoint& cp, const GroundTruth& gt,
                                double mu) {
  auto gt_ptr = std::make_shared<const GroundTruth>(gt);
  FactoredObjective g = FactoredObjective::factorization(gt_ptr, mu);
  FactoredPoint grad = g.gradient(cp.point);
  double grad_norm = std::sqrt(grad.U.squaredNorm() + grad.V.squaredNorm());
  double scale = std::max(1.0, std::pow(gt.sigma1(), 1.5));
  if (grad_norm > 1e-8 * scale)
    throw ValidationError("strict_saddle_audit: stale point, gradient nonzero");

  SaddleAudit audit{};
  audit.is_saddle = !cp.is_global_min;
  EigResult eig = min_hessian_eig(g, cp.point.stacked());
  audit.lambda_min_bound = cp.curvature_bound;

  if (cp.is_global_min) {
    const int r = gt.r_model();
    audit.flat_form_max = 0.0;
    for (int i = 0; i < r; ++i) {
      for (int j = i + 1; j < r; ++j) {
        Eigen::MatrixXd du = Eigen::MatrixXd::Zero(gt.n(), r);
        Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(gt.m(), r);
        du.col(i) = cp.point.U.col(j);
        du.col(j) = -cp.point.U.col(i);
        dv.col(i) = cp.point.V.col(j);
        dv.col(j) = -cp.point.V.col(i);
        double form = g.hess_quadratic(cp.point, FactoredPoint(du, dv));
        audit.flat_form_max = std::max(audit.flat_form_max, std::abs(form));
      }
    }
    audit.quad_form = 0.0;
    audit.rayleigh = 0.0;
    audit.expected_rayleigh = 0.0;
    audit.passed = audit.flat_form_max <= tol::derived * scale &&
                   eig.lambda_min >= -1e-8 * scale;
    return audit;
  }

  const int r = gt.r_model();
  Eigen::MatrixXd du, dv;
  if (gt.under_parameterized()) {
    int pick = 0;
    while (std::find(cp.selected.begin(), cp.selected.end(), pick) !=
           cp.selected.end())
      ++pick;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(
        cp.point.U.transpose() * cp.point.U);
    Eigen::VectorXd alpha = gram.eigenvectors().col(0);
    du = gt.phi().col(pick) * alpha.transpose();
    dv = gt.psi().col(pick) * alpha.transpose();
    double tail = (static_cast<int>(cp.selected.size()) == r)
                      ? gt.sigma()(cp.selected.back())
                      : 0.0;
    audit.expected_rayleigh = -(gt.sigma()(pick) - tail);
  } else {
    int pick = 0;
    while (std::find(cp.selected.begin(), cp.selected.end(), pick) !=
           cp.selected.end())
      ++pick;
    Eigen::MatrixXd stacked = cp.point.stacked();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(stacked.transpose() *
                                                        stacked);
    Eigen::VectorXd alpha = gram.eigenvectors().col(0);
    du = gt.phi().col(pick) * alpha.transpose();
    dv = gt.psi().col(pick) * alpha.transpose();
    audit.expected_rayleigh = -gt.sigma()(pick);
  }
  FactoredPoint delta(du, dv);
  audit.quad_form = g.hess_quadratic(cp.point, delta);
  double delta_sq = du.squaredNorm() + dv.squaredNorm();
  audit.rayleigh = audit.quad_form / delta_sq;
  bool direction_ok = std::abs(audit.rayleigh - audit.expected_rayleigh) <=
                      1e-8 * std::max(1.0, std::abs(audit.expected_rayleigh));
  bool lambda_ok = eig.lambda_min <= cp.curvature_bound + 1e-8 * scale;
  audit.passed = direction_ok && lambda_ok;
  return audit;
}

// ---------------------------------------------------------------------------
// Region samplers.

namespace {

FactoredPoint frame_point(Rng& rng, const GroundTruth& gt,
                          const Eigen::VectorXd& singulars) {
  int r = gt.r_model();
  Eigen::MatrixXd frame = rng.random_orthonormal(gt.n() + gt.m(), r);
  Eigen::MatrixXd mix = rng.random_orthogonal(r);
  Eigen::MatrixXd stacked = frame * singulars.asDiagonal() * mix.transpose();
  return FactoredPoint::from_stacked(stacked, gt.n());
}

}  // namespace

FactoredPoint sample_region(RegionLabel label, const GroundTruth& gt, Rng& rng,
                            int budget) {
  require_exact(gt, "sample_region");
  const int r = gt.r_model();
  const double sigma_r = gt.sigma_r();
  const double ball = std::sqrt(sigma_r);
  const double sigma_cap_sq = 0.5 * sigma_r;
  const double spectral_cap = region::spectral_cap * gt.wstar_spectral();
  const double gram_base = gt.wstar_gram_fro();

  for (int attempt = 0; attempt < budget; ++attempt) {
    FactoredPoint candidate = [&]() -> FactoredPoint {
      switch (label) {
        case RegionLabel::R1: {
          double t = rng.uniform(1e-3, 1.0);
          Eigen::MatrixXd rot = rng.random_orthogonal(r);
          Eigen::MatrixXd base = gt.optimum().rotated(rot).stacked();
          Eigen::MatrixXd dir = rng.sphere_matrix(gt.n() + gt.m(), r);
          return FactoredPoint::from_stacked(base + (t * ball) * dir, gt.n());
        }
        case RegionLabel::R2: {
          Eigen::VectorXd s(r);
          double cap = 0.98 * region::spectral_cap * gram_base / std::sqrt(double(r));
          s(0) = std::sqrt(rng.uniform(0.0, 0.998 * sigma_cap_sq));
          for (int i = 1; i < r; ++i)
            s(i) = std::sqrt(rng.uniform(0.0, cap));
          return frame_point(rng, gt, s);
        }
        case RegionLabel::R3a: {
          double lo = 1.002 * sigma_cap_sq;
          double hi = std::min(0.996 * spectral_cap * spectral_cap,
                               0.98 * region::spectral_cap * gram_base /
                                   std::sqrt(double(r)));
          if (lo >= hi)
            throw SamplerError("sample_region: R3a proposal box is empty");
          Eigen::VectorXd s(r);
          for (int i = 0; i < r; ++i) s(i) = std::sqrt(rng.uniform(lo, hi));
          return frame_point(rng, gt, s);
        }
        case RegionLabel::R3b: {
          Eigen::VectorXd s(r);
          s(0) = spectral_cap * rng.uniform(1.001, 1.04);
          for (int i = 1; i < r; ++i)
            s(i) = std::sqrt(rng.uniform(0.0, 0.01 * sigma_r));
          return frame_point(rng, gt, s);
        }
        case RegionLabel::R3c: {
          double target = region::gram_fro_cap * gram_base *
                          rng.uniform(1.02, 25.0);
          Eigen::MatrixXd g = rng.gaussian_matrix(gt.n() + gt.m(), r);
          double gram = (g.transpose() * g).norm();
          Eigen::MatrixXd stacked = g * std::sqrt(target / gram);
          return FactoredPoint::from_stacked(stacked, gt.n());
        }
      }
      throw ValidationError("sample_region: unknown label");
    }();
    if (classify_regions(candidate, gt).contains(label)) return candidate;
  }
  throw SamplerError("sample_region: proposal budget exhausted for region " +
                     to_string(label));
}

}  // namespace lowrank
