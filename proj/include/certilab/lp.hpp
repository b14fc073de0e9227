#pragma once

#include "certilab/matrix.hpp"

namespace certilab {

// min c'x  s.t.  eq_lhs x = eq_rhs,  ineq_lhs x <= ineq_rhs,
//                var_lower <= x <= var_upper.
// Empty matrices/vectors stand for "no such block"; empty bound vectors
// mean free variables. +-inf entries in the bound vectors are allowed.
struct LinearProgram {
  Vector objective;
  Matrix eq_lhs;
  Vector eq_rhs;
  Matrix ineq_lhs;
  Vector ineq_rhs;
  Vector var_lower;  // empty => all -inf
  Vector var_upper;  // empty => all +inf

  int num_vars() const { return static_cast<int>(objective.size()); }
  void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vector primal;
  double objective_value = 0.0;
  // Multipliers in the convention  c + eq'*dual_eq + ineq'*dual_ineq
  //   - mult_lower + mult_upper = 0,  dual_ineq >= 0, complementary with
  // the inequality slacks.  reduced_costs holds the bound multipliers
  // (positive at an active lower bound, negative at an active upper one).
  Vector dual_eq;
  Vector dual_ineq;
  Vector reduced_costs;
  int iterations = 0;
};

// Dense bounded-variable primal simplex, two-phase, Dantzig pricing with a
// Bland fallback once stalling is detected.  Throws SolverFailure when the
// pivot cap 50*(vars+constraints) is exceeded.
LpSolution solve_lp(const LinearProgram& problem, double feas_tol = 1e-8);

// Max-norm KKT residual of a solution against its program (stationarity,
// primal feasibility, complementary slackness, dual sign); used by tests.
double lp_kkt_residual(const LinearProgram& problem, const LpSolution& sol);

}  // namespace certilab
