#pragma once

#include <vector>

#include "certilab/matrix.hpp"

namespace certilab {

// Default relative threshold for all rank decisions (RRQR criterion: a
// column counts as dependent when its residual after projection drops
// below tol times the largest original column norm).
inline constexpr double kRankTol = 1e-10;

// Forward difference operator on n points: (n-1) x n, -1 on the diagonal,
// +1 on the superdiagonal.
Matrix diff_operator_1d(int n);

// Stacked 2D gradient [I_cols (x) d_rows ; d_cols (x) I_rows] for
// column-major images (pixel (i,j) -> index j*rows + i).
// Output is p x n with n = rows*cols, p = cols*(rows-1) + rows*(cols-1).
Matrix gradient_operator_2d(int img_rows, int img_cols);

Matrix kronecker(const Matrix& a, const Matrix& b);

// Orthonormal basis of the nullspace {x : Ax = 0}; n x d with
// d = n - rank(A), rank decided at relative tolerance tol.
Matrix nullspace_basis(const Matrix& a, double tol = kRankTol);

int rank_of(const Matrix& a, double tol = kRankTol);

// True iff the vertical stack of the blocks (all sharing a column count)
// has full column rank at relative tolerance tol.
bool stacked_full_column_rank(const std::vector<Matrix>& blocks,
                              double tol = kRankTol);

}  // namespace certilab
