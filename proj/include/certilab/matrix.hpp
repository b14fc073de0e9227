#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>

namespace certilab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SpMatrix = Eigen::SparseMatrix<double>;

// Errors are split by how the CLI maps them to exit codes: bad input data
// (65), infeasible problem instances (65), internal numerical failure (70).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Shared CSV matrix format: first line "rows,cols", then one
// comma-separated row per line, '.' radix. Vectors are n x 1 matrices.
Matrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Matrix& m);

Vector read_csv_vector(const std::string& path);
void write_csv_vector(const std::string& path, const Vector& v);

}  // namespace certilab
