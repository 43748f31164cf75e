// Command-line harness: certification sweeps, solver runs, sensing phase
// transitions, landscape grids, and the numerical property suite.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "lowrank/errors.hpp"
#include "lowrank/geometry.hpp"
#include "lowrank/matrix_io.hpp"
#include "lowrank/objectives.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/sensing.hpp"
#include "lowrank/solvers.hpp"
#include "lowrank/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lowrank;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

struct GlobalOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = hardware default
  std::string out_dir = "runs";
};

json load_config(const GlobalOptions& opts) {
  json cfg = json::object();
  if (!opts.config_path.empty()) {
    std::ifstream f(opts.config_path);
    if (!f) throw ValidationError("cannot open config: " + opts.config_path);
    f >> cfg;
  }
  if (cfg.contains("schema_version")) {
    if (!cfg["schema_version"].is_number_integer() ||
        cfg["schema_version"].get<int>() != kSchemaVersion)
      throw ValidationError("unsupported schema_version");
  }
  return cfg;
}

void reject_unknown_keys(const json& cfg, const std::vector<std::string>& allowed,
                         const std::string& context) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ValidationError("unknown config field '" + it.key() + "' in " +
                            context);
  }
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  return cfg.at(key).get<T>();
}

fs::path make_run_dir(const GlobalOptions& opts, const std::string& command) {
  fs::path dir = fs::path(opts.out_dir) /
                 (command + "-seed" + std::to_string(opts.seed));
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << text;
}

void write_manifest(const fs::path& dir, const GlobalOptions& opts,
                    const std::string& command, int jobs) {
  json manifest;
  manifest["command"] = command;
  manifest["seed"] = opts.seed;
  manifest["jobs"] = jobs;
  manifest["version"] = kVersion;
  auto now = std::chrono::system_clock::now();
  manifest["timestamp_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
          .count();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_config_copy(const fs::path& dir, const json& effective) {
  write_text(dir / "config.json", effective.dump(2) + "\n");
}

std::shared_ptr<const GroundTruth> make_ground_truth(int n, int m, int r,
                                                     double kappa,
                                                     std::uint64_t seed,
                                                     std::uint64_t index) {
  Eigen::VectorXd sigma(r);
  for (int i = 0; i < r; ++i) {
    double t = (r == 1) ? 0.0 : double(i) / (r - 1);
    sigma(i) = kappa * std::pow(1.0 / kappa, t);  // geometric from kappa to 1
  }
  Rng rng = Rng::stream(seed, 0x97000 + index);
  return std::make_shared<const GroundTruth>(
      GroundTruth::from_spectrum(n, m, sigma, r, rng));
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const GlobalOptions& opts, int trials_flag) {
  json cfg = load_config(opts);
  reject_unknown_keys(cfg, {"schema_version", "trials", "fd_points"}, "verify");
  int trials = trials_flag > 0 ? trials_flag : get_or(cfg, "trials", 1000);
  int fd_points = get_or(cfg, "fd_points", 20);
  if (trials < 1) throw ValidationError("verify: trials must be >= 1");
  if (fd_points < 1) throw ValidationError("verify: fd_points must be >= 1");

  int jobs = opts.jobs > 0 ? opts.jobs : default_jobs();
  fs::path dir = make_run_dir(opts, "verify");

  json report;
  report["command"] = "verify";
  report["seed"] = opts.seed;
  report["trials"] = trials;
  bool all_passed = true;

  // Finite-difference battery across the objective kinds.
  json fd = json::object();
  struct KindResult { double order1 = 0, order2 = 0; };
  auto record_kind = [&](const std::string& name, KindResult res) {
    fd[name] = {{"order1_max", res.order1}, {"order2_max", res.order2}};
    bool ok = res.order1 <= tol::fd_gradient && res.order2 <= tol::fd_hessian;
    all_passed = all_passed && ok;
  };

  KindResult fact, gen, sens, wpca;
  for (int i = 0; i < fd_points; ++i) {
    Rng rng = Rng::stream(opts.seed, 0xfd000 + i);
    int r = 1 + int(rng.uniform(0, 3));
    int n = r + 2 + int(rng.uniform(0, 4));
    int m = r + 1 + int(rng.uniform(0, 3));
    Eigen::VectorXd sigma(r);
    sigma(0) = rng.uniform(1.0, 3.0);
    for (int k = 1; k < r; ++k) sigma(k) = sigma(k - 1) * rng.uniform(0.5, 1.0);
    auto gt = std::make_shared<const GroundTruth>(
        GroundTruth::from_spectrum(n, m, sigma, r, rng));
    Eigen::MatrixXd w = rng.gaussian_matrix(n + m, r);

    FactoredObjective g = FactoredObjective::factorization(gt, 0.5);
    fact.order1 = std::max(fact.order1, fd_check(g, w, 1, opts.seed + i));
    fact.order2 = std::max(fact.order2, fd_check(g, w, 2, opts.seed + i));

    FactoredObjective gq =
        FactoredObjective::general(quadratic_loss(gt->xstar()), n, m, r, 0.5);
    gen.order1 = std::max(gen.order1, fd_check(gq, w, 1, opts.seed + i));
    gen.order2 = std::max(gen.order2, fd_check(gq, w, 2, opts.seed + i));

    auto op = std::make_shared<const MeasurementOperator>(
        MeasurementOperator::gaussian(n, m, 4 * (n + m) * r, opts.seed + 31 * i));
    FactoredObjective gs = FactoredObjective::sensing(gt, op, 0.5);
    sens.order1 = std::max(sens.order1, fd_check(gs, w, 1, opts.seed + i));
    sens.order2 = std::max(sens.order2, fd_check(gs, w, 2, opts.seed + i));

    Eigen::MatrixXd sym = rng.gaussian_matrix(n, n);
    sym = (0.5 * (sym + sym.transpose())).eval();
    Eigen::MatrixXd omega(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) omega(a, b) = rng.uniform(0.5, 2.0);
    omega = (0.5 * (omega + omega.transpose())).eval();
    SymmetricWeightedPca h(omega, sym);
    Eigen::MatrixXd u = rng.gaussian_matrix(n, r);
    wpca.order1 = std::max(wpca.order1, fd_check(h, u, 1, opts.seed + i));
    wpca.order2 = std::max(wpca.order2, fd_check(h, u, 2, opts.seed + i));
  }
  record_kind("factorization", fact);
  record_kind("general", gen);
  record_kind("sensing", sens);
  record_kind("weighted_pca", wpca);
  report["fd"] = fd;

  // Property suite (parallel across properties).
  std::vector<std::string> ids = property_ids();
  std::vector<PropertyReport> reports(ids.size());
  parallel_for(static_cast<int>(ids.size()), jobs, [&](int i) {
    PropertyReport rep{ids[i], trials, 0,
                       std::numeric_limits<double>::infinity(), 0};
    for (int t = 0; t < trials; ++t) {
      double margin = run_property_trial(ids[i], opts.seed, t);
      if (margin < -tol::derived) ++rep.failures;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_index = t;
      }
    }
    reports[i] = std::move(rep);
  });

  json props = json::array();
  std::printf("%-34s %8s %9s %14s\n", "property", "trials", "failures",
              "worst margin");
  for (const auto& rep : reports) {
    props.push_back({{"id", rep.id},
                     {"trials", rep.trials},
                     {"failures", rep.failures},
                     {"worst_margin", rep.worst_margin},
                     {"worst_index", rep.worst_index}});
    std::printf("%-34s %8d %9d %14.3e\n", rep.id.c_str(), rep.trials,
                rep.failures, rep.worst_margin);
    all_passed = all_passed && rep.failures == 0;
  }
  report["properties"] = props;
  report["passed"] = all_passed;

  write_config_copy(dir, json{{"schema_version", kSchemaVersion},
                              {"trials", trials},
                              {"fd_points", fd_points}});
  write_manifest(dir, opts, "verify", jobs);
  write_text(dir / "report.json", report.dump(2) + "\n");
  std::printf("verify: %s (report in %s)\n", all_passed ? "PASS" : "FAIL",
              dir.string().c_str());
  return all_passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// geometry

int cmd_geometry(const GlobalOptions& opts, int samples_flag) {
  json cfg = load_config(opts);
  reject_unknown_keys(cfg,
                      {"schema_version", "n", "m", "r", "kappa", "ground_truths",
                       "samples_per_region", "coverage_samples", "sensing",
                       "p_factor", "probe_trials"},
                      "geometry");
  int n = get_or(cfg, "n", 6);
  int m = get_or(cfg, "m", 5);
  int r = get_or(cfg, "r", 2);
  double kappa = get_or(cfg, "kappa", 2.0);
  int num_gt = get_or(cfg, "ground_truths", 5);
  int samples = samples_flag > 0 ? samples_flag
                                 : get_or(cfg, "samples_per_region", 500);
  int coverage_samples = get_or(cfg, "coverage_samples", 10000);
  bool sensing = get_or(cfg, "sensing", false);
  int p_factor = get_or(cfg, "p_factor", 8);
  int probe_trials = get_or(cfg, "probe_trials", 200);
  if (n < 1 || m < 1 || r < 1 || r > std::min(n, m))
    throw ValidationError("geometry: invalid dimensions");
  if (num_gt < 1 || samples < 1)
    throw ValidationError("geometry: counts must be >= 1");
  if (p_factor < 1) throw ValidationError("geometry: p_factor must be >= 1");

  int jobs = opts.jobs > 0 ? opts.jobs : default_jobs();
  fs::path dir = make_run_dir(opts, "geometry");

  const RegionLabel all_labels[] = {RegionLabel::R1, RegionLabel::R2,
                                    RegionLabel::R3a, RegionLabel::R3b,
                                    RegionLabel::R3c};
  struct Cell { int samples = 0; int passes = 0; };
  std::map<std::string, Cell> table;  // key: objective/region
  std::ostringstream points_stream;
  json gates_report = json::array();
  bool any_certificate_failed = false;
  int sampler_exhausted = 0;

  for (int gi = 0; gi < num_gt; ++gi) {
    auto gt = make_ground_truth(n, m, r, kappa, opts.seed, gi);
    FactoredObjective fact = FactoredObjective::factorization(gt, 0.5);
    std::unique_ptr<FactoredObjective> sens;
    if (sensing) {
      int p = p_factor * (n + m) * r * r;
      auto op = std::make_shared<const MeasurementOperator>(
          MeasurementOperator::gaussian(n, m, p, opts.seed ^ (0xab00 + gi)));
      sens = std::make_unique<FactoredObjective>(
          FactoredObjective::sensing(gt, op, 0.5));
      LiftedObjective f = sensing_loss(op, op->apply(gt->xstar()));
      double c_hat = restricted_convexity_probe(f, n, m, r, 4 * r, probe_trials,
                                                opts.seed + 7 * gi)
                         .c_hat;
      SensingGates gates = sensing_gates(c_hat, *gt);
      gates_report.push_back(
          {{"ground_truth", gi},
           {"c_hat", c_hat},
           {"regularity_ok", gates.regularity_ok},
           {"curvature_ok", gates.curvature_ok},
           {"gradient_ok", gates.gradient_ok},
           {"regularity_threshold", gates.regularity_threshold},
           {"curvature_threshold", gates.curvature_threshold},
           {"gradient_threshold", gates.gradient_threshold}});
    }

    for (RegionLabel label : all_labels) {
      std::vector<std::string> lines(samples);
      std::vector<int> fact_pass(samples, 0), sens_pass(samples, 0);
      std::vector<int> exhausted(samples, 0);
      parallel_for(samples, jobs, [&](int si) {
        Rng rng = Rng::stream(opts.seed,
                              0x9e0000ULL + gi * 1000003ULL +
                                  static_cast<std::uint64_t>(label) * 65537ULL +
                                  si);
        FactoredPoint w = [&]() {
          try {
            return sample_region(label, *gt, rng);
          } catch (const SamplerError&) {
            exhausted[si] = 1;
            return gt->optimum();
          }
        }();
        if (exhausted[si]) return;
        int index = gi * samples + si;
        GeometryCertificate cert = certify_point(fact, w, *gt);
        fact_pass[si] = cert.all_passed() ? 1 : 0;
        std::string line = cert.to_json_line(index, "factorization");
        if (sens) {
          GeometryCertificate scert = certify_point(*sens, w, *gt);
          sens_pass[si] = scert.all_passed() ? 1 : 0;
          line += "\n" + scert.to_json_line(index, "sensing");
        }
        lines[si] = std::move(line);
      });
      for (int si = 0; si < samples; ++si) {
        if (exhausted[si]) {
          ++sampler_exhausted;
          continue;
        }
        points_stream << lines[si] << "\n";
        auto& fc = table["factorization/" + to_string(label)];
        ++fc.samples;
        fc.passes += fact_pass[si];
        if (!fact_pass[si]) any_certificate_failed = true;
        if (sens) {
          auto& scell = table["sensing/" + to_string(label)];
          ++scell.samples;
          scell.passes += sens_pass[si];
          if (!sens_pass[si]) any_certificate_failed = true;
        }
      }
    }
  }

  // Region cover check on the first ground truth.
  auto gt0 = make_ground_truth(n, m, r, kappa, opts.seed, 0);
  std::vector<int> uncovered(coverage_samples, 0);
  parallel_for(coverage_samples, jobs, [&](int i) {
    Rng rng = Rng::stream(opts.seed, 0xc0be0000ULL + i);
    double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
    FactoredPoint w(scale * rng.gaussian_matrix(n, r),
                    scale * rng.gaussian_matrix(m, r));
    uncovered[i] = classify_regions(w, *gt0).empty() ? 1 : 0;
  });
  int uncovered_count = 0;
  for (int u : uncovered) uncovered_count += u;

  // Emit outputs.
  write_text(dir / "points.jsonl", points_stream.str());
  std::ostringstream csv;
  csv << "objective,region,samples,passes,pass_rate\n";
  std::printf("%-16s %-6s %8s %8s %9s\n", "objective", "region", "samples",
              "passes", "rate");
  for (const auto& [key, cell] : table) {
    auto slash = key.find('/');
    std::string objective = key.substr(0, slash);
    std::string region = key.substr(slash + 1);
    double rate = cell.samples ? double(cell.passes) / cell.samples : 0.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.6f\n", objective.c_str(),
                  region.c_str(), cell.samples, cell.passes, rate);
    csv << buf;
    std::printf("%-16s %-6s %8d %8d %8.1f%%\n", objective.c_str(),
                region.c_str(), cell.samples, cell.passes, 100.0 * rate);
  }
  write_text(dir / "summary.csv", csv.str());

  json summary;
  summary["command"] = "geometry";
  summary["seed"] = opts.seed;
  summary["coverage"] = {{"samples", coverage_samples},
                         {"uncovered", uncovered_count}};
  if (sensing) summary["gates"] = gates_report;
  summary["sampler_exhausted"] = sampler_exhausted;
  summary["partial"] = sampler_exhausted > 0;
  bool passed =
      !any_certificate_failed && uncovered_count == 0 && sampler_exhausted == 0;
  summary["passed"] = passed;
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  write_config_copy(dir, json{{"schema_version", kSchemaVersion},
                              {"n", n},
                              {"m", m},
                              {"r", r},
                              {"kappa", kappa},
                              {"ground_truths", num_gt},
                              {"samples_per_region", samples},
                              {"coverage_samples", coverage_samples},
                              {"sensing", sensing},
                              {"p_factor", p_factor},
                              {"probe_trials", probe_trials}});
  write_manifest(dir, opts, "geometry", jobs);
  std::printf("coverage: %d/%d labeled; geometry: %s (outputs in %s)\n",
              coverage_samples - uncovered_count, coverage_samples,
              passed ? "PASS" : "FAIL", dir.string().c_str());
  return passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const GlobalOptions& opts, const std::string& objective_flag) {
  json cfg = load_config(opts);
  reject_unknown_keys(
      cfg, {"schema_version", "objective", "n", "m", "r", "kappa", "p_factor",
            "init", "init_scale", "step_size", "max_iters", "grad_tol",
            "noise_radius", "noise_trigger", "stride", "starts", "omega",
            "xstar"},
      "solve");
  std::string objective =
      !objective_flag.empty()
          ? objective_flag
          : get_or<std::string>(cfg, "objective", "factorization");
  int jobs = opts.jobs > 0 ? opts.jobs : default_jobs();
  fs::path dir = make_run_dir(opts, "solve");

  SolverConfig scfg;
  scfg.step_size = get_or(cfg, "step_size", 0.0);
  scfg.max_iters = get_or(cfg, "max_iters", 20000);
  scfg.grad_tol = get_or(cfg, "grad_tol", 1e-9);
  scfg.noise.radius = get_or(cfg, "noise_radius", 0.0);
  scfg.noise.trigger = get_or(cfg, "noise_trigger", solver::default_noise_trigger);
  scfg.stride = get_or(cfg, "stride", solver::default_stride);
  scfg.seed = opts.seed;

  json summary;
  summary["command"] = "solve";
  summary["seed"] = opts.seed;
  summary["objective"] = objective;
  int exit_code = 0;

  if (objective == "weighted_pca") {
    Eigen::MatrixXd omega(2, 2), xstar(2, 2);
    if (cfg.contains("omega")) {
      auto a = cfg["omega"];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) omega(i, j) = a.at(i).at(j).get<double>();
    } else {
      omega << 8, 1, 1, 8;
    }
    if (cfg.contains("xstar")) {
      auto a = cfg["xstar"];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) xstar(i, j) = a.at(i).at(j).get<double>();
    } else {
      xstar << 1, 1, 1, 1;
    }
    SymmetricWeightedPca h(omega, xstar);
    int starts = get_or(cfg, "starts", 50);
    json found = json::array();
    bool spurious_found = false;
    Trajectory last;
    for (int s = 0; s < starts; ++s) {
      Rng rng = Rng::stream(opts.seed, 0x50000 + s);
      Eigen::MatrixXd u0 = 2.0 * rng.gaussian_matrix(2, 1);
      SolverConfig run = scfg;
      run.seed = opts.seed + s;
      Trajectory traj = gradient_descent(h, u0, run);
      last = traj;
      if (traj.reason != Termination::grad_tol) continue;
      Eigen::MatrixXd u = traj.last().point;
      double value = h.value(u);
      double grad = h.gradient(u).norm();
      EigResult eig = min_hessian_eig(h, u);
      bool is_min = eig.lambda_min >= -1e-8;
      bool spurious = is_min && value > 0.1 && grad < 1e-8;
      spurious_found = spurious_found || spurious;
      found.push_back({{"start", s},
                       {"u", {u(0, 0), u(1, 0)}},
                       {"value", value},
                       {"grad_norm", grad},
                       {"lambda_min", eig.lambda_min},
                       {"local_min", is_min},
                       {"spurious", spurious}});
    }
    summary["starts"] = starts;
    summary["critical_points"] = found;
    summary["spurious_found"] = spurious_found;
    std::ostringstream tr;
    last.write_csv(tr);
    write_text(dir / "trajectory.csv", tr.str());
  } else {
    int n = get_or(cfg, "n", 6);
    int m = get_or(cfg, "m", 5);
    int r = get_or(cfg, "r", 2);
    double kappa = get_or(cfg, "kappa", 1.0);
    auto gt = make_ground_truth(n, m, r, kappa, opts.seed, 0);
    std::unique_ptr<FactoredObjective> obj;
    if (objective == "factorization") {
      obj = std::make_unique<FactoredObjective>(
          FactoredObjective::factorization(gt, 0.5));
    } else if (objective == "sensing") {
      int p_factor = get_or(cfg, "p_factor", 8);
      if (p_factor < 1) throw ValidationError("solve: p_factor must be >= 1");
      auto op = std::make_shared<const MeasurementOperator>(
          MeasurementOperator::gaussian(n, m, p_factor * (n + m) * r * r,
                                        opts.seed ^ 0xfeed));
      obj = std::make_unique<FactoredObjective>(
          FactoredObjective::sensing(gt, op, 0.5));
    } else {
      throw ValidationError("solve: unknown objective '" + objective + "'");
    }

    std::string init = get_or<std::string>(cfg, "init", "random");
    double init_scale = get_or(cfg, "init_scale", 1.0);
    Rng rng = Rng::stream(opts.seed, 0x1417);
    Eigen::MatrixXd w0;
    if (init == "random") {
      w0 = init_scale * rng.gaussian_matrix(n + m, r);
    } else if (init == "near_optimum") {
      FactoredPoint w = sample_region(RegionLabel::R1, *gt, rng);
      w0 = w.stacked();
    } else if (init == "saddle") {
      if (r < 2) throw ValidationError("solve: saddle init needs r >= 2");
      std::vector<int> sel(r - 1);
      for (int i = 0; i < r - 1; ++i) sel[i] = i;
      w0 = build_critical_point(*gt, sel).point.stacked();
    } else {
      throw ValidationError("solve: unknown init '" + init + "'");
    }

    if (scfg.step_size == 0.0) {
      double beta = certificate_constants(obj->kind()).regularity_beta /
                    gt->spectral_norm();
      scfg.step_size = default_step_size(*obj, w0, beta);
    }

    Eigen::MatrixXd target = gt->optimum().stacked();
    DistanceFn distance = [target](const Eigen::MatrixXd& w) {
      return dist(w, target);
    };
    Trajectory traj =
        scfg.noise.radius > 0
            ? perturbed_gradient_descent(*obj, w0, scfg, distance)
            : gradient_descent(*obj, w0, scfg, distance);

    std::ostringstream tr;
    traj.write_csv(tr);
    write_text(dir / "trajectory.csv", tr.str());

    FactoredPoint wend = obj->split(traj.last().point);
    double rel_err = (wend.product() - gt->xstar()).norm() / gt->frob_norm();
    summary["termination"] = to_string(traj.reason);
    summary["iterations"] = traj.iterations;
    summary["step_size"] = traj.step_size;
    summary["final_value"] = traj.last().value;
    summary["final_grad_norm"] = traj.last().grad_norm;
    summary["relative_error"] = rel_err;
    if (init == "near_optimum") {
      double alpha = certificate_constants(obj->kind()).regularity_alpha *
                     gt->sigma_r();
      RateAudit audit =
          rate_audit(traj, alpha, traj.step_size, std::sqrt(gt->sigma_r()));
      summary["rate_audit"] = {{"flagged_steps", audit.flagged_steps},
                               {"stayed_in_ball", audit.stayed_in_ball},
                               {"steps_checked", audit.steps_checked}};
    }
    if (traj.reason == Termination::diverged) exit_code = 1;
  }

  json cfg_copy = cfg;
  cfg_copy["schema_version"] = kSchemaVersion;
  cfg_copy["objective"] = objective;
  write_config_copy(dir, cfg_copy);
  write_manifest(dir, opts, "solve", jobs);
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  std::printf("solve: %s (outputs in %s)\n",
              exit_code == 0 ? "done" : "diverged", dir.string().c_str());
  return exit_code;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const GlobalOptions& opts) {
  json cfg = load_config(opts);
  reject_unknown_keys(cfg,
                      {"schema_version", "n", "m", "r", "kappas", "p_factors",
                       "seeds", "success_rel_err", "max_iters", "grad_tol",
                       "init_scale"},
                      "sweep");
  int n = get_or(cfg, "n", 20);
  int m = get_or(cfg, "m", 20);
  int r = get_or(cfg, "r", 2);
  std::vector<double> kappas = get_or(cfg, "kappas", std::vector<double>{1.0});
  std::vector<int> p_factors =
      get_or(cfg, "p_factors", std::vector<int>{1, 2, 4, 8, 12});
  int seeds = get_or(cfg, "seeds", 20);
  double success_rel_err = get_or(cfg, "success_rel_err", 1e-3);
  int max_iters = get_or(cfg, "max_iters", 6000);
  // Terminate above the kick trigger so converged runs stop cleanly.
  double grad_tol = get_or(cfg, "grad_tol", 2e-5);
  double init_scale = get_or(cfg, "init_scale", 0.7);
  for (int pf : p_factors)
    if (pf < 1 || pf * (n + m) * r * r <= 0)
      throw ValidationError("sweep: measurement count must be positive");
  if (seeds < 1) throw ValidationError("sweep: seeds must be >= 1");

  int jobs = opts.jobs > 0 ? opts.jobs : default_jobs();
  fs::path dir = make_run_dir(opts, "sweep");

  struct CellResult { double rel_err; int success; int iters; };
  const int cells = static_cast<int>(kappas.size() * p_factors.size() * seeds);
  std::vector<CellResult> results(cells);

  parallel_for(cells, jobs, [&](int idx) {
    int per_kappa = static_cast<int>(p_factors.size()) * seeds;
    int ki = idx / per_kappa;
    int pi = (idx % per_kappa) / seeds;
    int si = idx % seeds;
    double kappa = kappas[ki];
    int p = p_factors[pi] * (n + m) * r * r;

    auto gt = make_ground_truth(n, m, r, kappa, opts.seed, 100 + si);
    auto op = std::make_shared<const MeasurementOperator>(
        MeasurementOperator::gaussian(n, m, p, opts.seed * 131 + idx));
    FactoredObjective obj = FactoredObjective::sensing(gt, op, 0.5);

    Rng rng = Rng::stream(opts.seed, 0x50EE70ULL + idx);
    Eigen::MatrixXd w0 = init_scale * rng.gaussian_matrix(n + m, r);
    SolverConfig scfg;
    scfg.max_iters = max_iters;
    scfg.grad_tol = grad_tol;
    scfg.noise = {solver::default_noise_radius, solver::default_noise_trigger};
    scfg.seed = opts.seed + idx;
    double beta =
        certificate_constants(obj.kind()).regularity_beta / gt->spectral_norm();
    scfg.step_size = default_step_size(obj, w0, beta);

    Trajectory traj = perturbed_gradient_descent(obj, w0, scfg);
    FactoredPoint wend = obj.split(traj.last().point);
    double rel_err = (wend.product() - gt->xstar()).norm() / gt->frob_norm();
    results[idx] = {rel_err, rel_err <= success_rel_err ? 1 : 0,
                    traj.iterations};
  });

  std::ostringstream csv;
  csv << "kappa,p_factor,p,seed,rel_err,success,iterations\n";
  json rates = json::array();
  bool monotone_ok = true;
  for (size_t ki = 0; ki < kappas.size(); ++ki) {
    double prev_rate = -1.0;
    int violations = 0;
    for (size_t pi = 0; pi < p_factors.size(); ++pi) {
      int successes = 0;
      for (int si = 0; si < seeds; ++si) {
        int idx = static_cast<int>((ki * p_factors.size() + pi) * seeds + si);
        const CellResult& cell = results[idx];
        successes += cell.success;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%g,%d,%d,%d,%.8e,%d,%d\n", kappas[ki],
                      p_factors[pi], p_factors[pi] * (n + m) * r * r, si,
                      cell.rel_err, cell.success, cell.iters);
        csv << buf;
      }
      double rate = double(successes) / seeds;
      rates.push_back({{"kappa", kappas[ki]},
                       {"p_factor", p_factors[pi]},
                       {"success_rate", rate}});
      std::printf("kappa %-5g p=%2dx(n+m)r^2  success %5.1f%%\n", kappas[ki],
                  p_factors[pi], 100.0 * rate);
      if (prev_rate >= 0 && rate < prev_rate - 1e-12) ++violations;
      prev_rate = rate;
    }
    if (violations > 1) monotone_ok = false;
  }
  write_text(dir / "sweep.csv", csv.str());

  json summary;
  summary["command"] = "sweep";
  summary["seed"] = opts.seed;
  summary["rates"] = rates;
  summary["monotone_with_one_violation"] = monotone_ok;
  if (kappas.size() > 1) {
    // Conditioning trend: success should not improve as kappa grows.
    bool trend_ok = true;
    for (size_t pi = 0; pi < p_factors.size(); ++pi) {
      int violations = 0;
      double prev = 2.0;
      for (size_t ki = 0; ki < kappas.size(); ++ki) {
        double rate = rates[ki * p_factors.size() + pi]["success_rate"];
        if (rate > prev + 1e-12) ++violations;
        prev = rate;
      }
      if (violations > 1) trend_ok = false;
    }
    summary["kappa_trend_nonincreasing"] = trend_ok;
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  write_config_copy(dir, json{{"schema_version", kSchemaVersion},
                              {"n", n},
                              {"m", m},
                              {"r", r},
                              {"kappas", kappas},
                              {"p_factors", p_factors},
                              {"seeds", seeds},
                              {"success_rel_err", success_rel_err},
                              {"max_iters", max_iters},
                              {"grad_tol", grad_tol},
                              {"init_scale", init_scale}});
  write_manifest(dir, opts, "sweep", jobs);
  std::printf("sweep: done (outputs in %s)\n", dir.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// landscape

int cmd_landscape(const GlobalOptions& opts) {
  json cfg = load_config(opts);
  reject_unknown_keys(cfg,
                      {"schema_version", "omega", "xstar", "lo", "hi", "steps"},
                      "landscape");
  Eigen::MatrixXd omega(2, 2), xstar(2, 2);
  if (cfg.contains("omega")) {
    auto a = cfg["omega"];
    if (a.size() != 2 || a.at(0).size() != 2)
      throw ValidationError("landscape: only the 2x2 case is supported");
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) omega(i, j) = a.at(i).at(j).get<double>();
  } else {
    omega << 1, 1, 1, 1;
  }
  if (cfg.contains("xstar")) {
    auto a = cfg["xstar"];
    if (a.size() != 2 || a.at(0).size() != 2)
      throw ValidationError("landscape: only the 2x2 case is supported");
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) xstar(i, j) = a.at(i).at(j).get<double>();
  } else {
    xstar << 1, 1, 1, 1;
  }
  double lo = get_or(cfg, "lo", -2.0);
  double hi = get_or(cfg, "hi", 2.0);
  int steps = get_or(cfg, "steps", 81);
  if (steps < 3) throw ValidationError("landscape: steps must be >= 3");
  if (!(hi > lo)) throw ValidationError("landscape: need hi > lo");

  fs::path dir = make_run_dir(opts, "landscape");
  SymmetricWeightedPca h(omega, xstar);

  Eigen::MatrixXd values(steps, steps);
  std::ostringstream csv;
  csv << "u1,u2,value,grad_norm\n";
  char buf[160];
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j < steps; ++j) {
      double u1 = lo + (hi - lo) * i / (steps - 1);
      double u2 = lo + (hi - lo) * j / (steps - 1);
      Eigen::MatrixXd u(2, 1);
      u << u1, u2;
      double value = h.value(u);
      double grad = h.gradient(u).norm();
      values(i, j) = value;
      std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.17g,%.17g\n", u1, u2,
                    value, grad);
      csv << buf;
    }
  }
  write_text(dir / "grid.csv", csv.str());

  // Interior grid-local minima (strictly smaller than all 8 neighbors).
  json minima = json::array();
  for (int i = 1; i + 1 < steps; ++i) {
    for (int j = 1; j + 1 < steps; ++j) {
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          if (values(i + di, j + dj) <= values(i, j)) {
            is_min = false;
            break;
          }
        }
      if (is_min) {
        double u1 = lo + (hi - lo) * i / (steps - 1);
        double u2 = lo + (hi - lo) * j / (steps - 1);
        minima.push_back({{"u1", u1}, {"u2", u2}, {"value", values(i, j)}});
      }
    }
  }

  json summary;
  summary["command"] = "landscape";
  summary["seed"] = opts.seed;
  summary["grid_minima"] = minima;
  summary["grid_minima_count"] = minima.size();
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  write_config_copy(dir, json{{"schema_version", kSchemaVersion},
                              {"omega",
                               {{omega(0, 0), omega(0, 1)},
                                {omega(1, 0), omega(1, 1)}}},
                              {"xstar",
                               {{xstar(0, 0), xstar(0, 1)},
                                {xstar(1, 0), xstar(1, 1)}}},
                              {"lo", lo},
                              {"hi", hi},
                              {"steps", steps}});
  write_manifest(dir, opts, "landscape", opts.jobs > 0 ? opts.jobs : 1);
  std::printf("landscape: %zu grid minima (outputs in %s)\n",
              static_cast<size_t>(minima.size()), dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factored low-rank matrix optimization and landscape "
               "certification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "JSON config file");
  app.add_option("--seed", opts.seed, "Master seed");
  app.add_option("--jobs", opts.jobs, "Worker threads (default: hardware)");
  app.add_option("--out", opts.out_dir, "Output directory root");

  auto* verify_cmd =
      app.add_subcommand("verify", "Run the numerical property suite");
  int trials_flag = 0;
  verify_cmd->add_option("--trials", trials_flag, "Trials per property");

  auto* geometry_cmd = app.add_subcommand(
      "geometry", "Certify landscape regions on sampled points");
  int samples_flag = 0;
  geometry_cmd->add_option("--samples", samples_flag, "Samples per region");

  auto* solve_cmd =
      app.add_subcommand("solve", "Run (perturbed) gradient descent");
  std::string objective_flag;
  solve_cmd->add_option("--objective", objective_flag,
                        "factorization | sensing | weighted_pca");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "Sensing recovery phase-transition sweep");
  auto* landscape_cmd =
      app.add_subcommand("landscape", "Emit a 2D objective grid");

  try {
    app.parse(argc, argv);
    if (verify_cmd->parsed()) return cmd_verify(opts, trials_flag);
    if (geometry_cmd->parsed()) return cmd_geometry(opts, samples_flag);
    if (solve_cmd->parsed()) return cmd_solve(opts, objective_flag);
    if (sweep_cmd->parsed()) return cmd_sweep(opts);
    if (landscape_cmd->parsed()) return cmd_landscape(opts);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
}
