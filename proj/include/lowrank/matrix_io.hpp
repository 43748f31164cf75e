#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace lowrank {

// Plain-text matrix format used across the repository:
//
//   rows cols
//   a11 a12 ... a1m
//   ...
//
// Values are written with 17 significant digits, which round-trips IEEE
// doubles exactly.

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& is);

std::string matrix_to_string(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_string(const std::string& text);

void save_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::string& path);

}  // namespace lowrank
