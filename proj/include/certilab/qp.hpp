#pragma once

#include "certilab/matrix.hpp"

namespace certilab {

// Euclidean projection of `target` onto the affine-parametrized box set
//   { offset + basis * z : lower <= z <= upper },
// which covers every constraint set this project projects onto (fixed
// coordinates live in `offset`, interval/half-line coefficients in the
// bounds).  +-inf bound entries are allowed.
struct QuadraticProjection {
  Vector target;
  Vector offset;  // empty => zero
  Matrix basis;   // n x d
  Vector lower;   // empty => all -inf
  Vector upper;   // empty => all +inf

  void validate() const;
};

struct ProjectionResult {
  Vector point;        // offset + basis*z
  double sq_distance = 0.0;
  Vector coefficients;    // z
  Vector bound_multipliers;  // gradient of ||target - point||^2 wrt z
  int iterations = 0;
};

// Active-set solver for the bound-constrained least-squares projection
// (block principal pivoting with a single-exchange fallback against
// cycling).  The result satisfies the projected-gradient KKT condition to
// feas_tol; warm starts may pass the previous coefficient vector.
ProjectionResult solve_projection(const QuadraticProjection& qp,
                                  double feas_tol = 1e-8,
                                  const Vector* warm_start = nullptr);

double projection_kkt_residual(const QuadraticProjection& qp,
                               const ProjectionResult& res);

}  // namespace certilab
