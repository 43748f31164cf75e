#include "lowrank/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lowrank/errors.hpp"

namespace lowrank {

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << m.rows() << " " << m.cols() << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      os << buf << (j + 1 < m.cols() ? " " : "");
    }
    os << "\n";
  }
}

Eigen::MatrixXd read_matrix(std::istream& is) {
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw ValidationError("matrix header: expected 'rows cols'");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(is >> m(i, j)))
        throw ValidationError("matrix body: not enough values");
  return m;
}

std::string matrix_to_string(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  write_matrix(os, m);
  return os.str();
}

Eigen::MatrixXd matrix_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_matrix(is);
}

void save_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open for writing: " + path);
  write_matrix(f, m);
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open for reading: " + path);
  return read_matrix(f);
}

}  // namespace lowrank
