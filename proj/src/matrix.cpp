#include "certilab/matrix.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace certilab {

namespace {

std::vector<double> parse_row(const std::string& line, const std::string& path) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    const std::string tok = line.substr(pos, comma - pos);
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InvalidInput("bad numeric field '" + tok + "' in " + path);
    }
    pos = comma + 1;
    if (comma == line.size()) break;
  }
  return out;
}

}  // namespace

Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw InvalidInput("empty file " + path);
  int rows = 0, cols = 0;
  if (std::sscanf(header.c_str(), "%d,%d", &rows, &cols) != 2 || rows < 0 ||
      cols < 0) {
    throw InvalidInput("expected 'rows,cols' header in " + path);
  }
  Matrix m(rows, cols);
  std::string line;
  for (int i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw InvalidInput("truncated matrix in " + path);
    }
    const auto vals = parse_row(line, path);
    if (static_cast<int>(vals.size()) != cols) {
      throw InvalidInput("row " + std::to_string(i) + " of " + path +
                         " has wrong width");
    }
    for (int j = 0; j < cols; ++j) m(i, j) = vals[j];
  }
  if (!all_finite(m)) throw InvalidInput("non-finite entries in " + path);
  return m;
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  char buf[64];
  out << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf;
      if (j + 1 < m.cols()) out << ',';
    }
    out << '\n';
  }
  if (!out) throw InvalidInput("write failed for " + path);
}

Vector read_csv_vector(const std::string& path) {
  Matrix m = read_csv_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw InvalidInput(path + " is not a vector (one row or one column)");
}

void write_csv_vector(const std::string& path, const Vector& v) {
  write_csv_matrix(path, Matrix(v));
}

}  // namespace certilab
