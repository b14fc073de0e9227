#include "certilab/linalg.hpp"

#include <Eigen/QR>

namespace certilab {

Matrix diff_operator_1d(int n) {
  if (n < 2) throw InvalidInput("diff_operator_1d: need n >= 2");
  Matrix d = Matrix::Zero(n - 1, n);
  for (int i = 0; i < n - 1; ++i) {
    d(i, i) = -1.0;
    d(i, i + 1) = 1.0;
  }
  return d;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix gradient_operator_2d(int img_rows, int img_cols) {
  if (img_rows < 2 || img_cols < 2) {
    throw InvalidInput("gradient_operator_2d: need both sides >= 2");
  }
  // Vertical differences within columns, then horizontal across columns;
  // pixel (i,j) lives at index j*img_rows + i.
  const Matrix dv = diff_operator_1d(img_rows);
  const Matrix dh = diff_operator_1d(img_cols);
  const Matrix iv = Matrix::Identity(img_rows, img_rows);
  const Matrix ih = Matrix::Identity(img_cols, img_cols);
  const int n = img_rows * img_cols;
  const int p = img_cols * (img_rows - 1) + img_rows * (img_cols - 1);
  Matrix g(p, n);
  g.topRows(img_cols * (img_rows - 1)) = kronecker(ih, dv);
  g.bottomRows(img_rows * (img_cols - 1)) = kronecker(dh, iv);
  return g;
}

int rank_of(const Matrix& a, double tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

Matrix nullspace_basis(const Matrix& a, double tol) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() == 0) return Matrix::Identity(n, n);
  // Column-pivoted QR of A': the trailing columns of Q form an orthonormal
  // basis of R(A')^perp = N(A).
  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  qr.setThreshold(tol);
  const int r = static_cast<int>(qr.rank());
  if (r >= n) return Matrix(n, 0);
  Matrix q = qr.householderQ();
  return q.rightCols(n - r);
}

bool stacked_full_column_rank(const std::vector<Matrix>& blocks, double tol) {
  if (blocks.empty()) {
    throw InvalidInput("stacked_full_column_rank: no blocks");
  }
  const int n = static_cast<int>(blocks.front().cols());
  Eigen::Index total_rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != n) {
      throw InvalidInput("stacked_full_column_rank: mismatched column counts");
    }
    total_rows += b.rows();
  }
  Matrix stack(total_rows, n);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    stack.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return rank_of(stack, tol) == n;
}

}  // namespace certilab
