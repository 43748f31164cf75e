#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lowrank/matrix_function.hpp"

namespace lowrank {

/// Relative disagreement between hand-coded derivatives and central finite
/// differences at `at`.  Order 1 compares the full gradient; order 2
/// compares the Hessian quadratic form along 10 random directions.
double fd_check(const MatrixFunction& fn, const Eigen::MatrixXd& at, int order,
                std::uint64_t seed = 0);

/// Outcome of one quantified numerical property.  A trial's margin is
/// scale-normalized and negative when the property failed; `worst_index`
/// replays the worst instance through run_property_trial.
struct PropertyReport {
  std::string id;
  int trials;
  int failures;
  double worst_margin;
  std::uint64_t worst_index;
};

/// Identifiers of every property in the suite.
std::vector<std::string> property_ids();

/// Runs a single trial of one property; deterministic in (seed, index).
double run_property_trial(const std::string& id, std::uint64_t seed,
                          std::uint64_t index);

/// Runs `trials` instances of every property.  A report passes when
/// failures == 0.
std::vector<PropertyReport> property_suite(std::uint64_t seed, int trials);

}  // namespace lowrank
