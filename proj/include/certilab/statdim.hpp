#pragma once

#include <cstdint>
#include <utility>

#include "certilab/objectives.hpp"

namespace certilab {

enum class StatDimMethod { closed_form, monte_carlo };

struct StatDimEstimate {
  double tau_star = 0.0;
  double j_star = 0.0;
  int samples = 0;          // 0 for closed form
  double stderr_value = 0.0;
  StatDimMethod method = StatDimMethod::monte_carlo;
  double search_lo = 0.0;
  double search_hi = 0.0;
  bool best_effort = false;  // set when 0 in df(x) (no interval guarantee)
};

// Squared distance from x to tau * df(x_bar) described by sd; coordinate
// separable closed form when D = I, bound-constrained least squares via
// solve_projection otherwise.
double dist_sq_to_scaled_subdiff(const Vector& x, double tau,
                                 const SubdiffDescription& sd,
                                 double qp_tol = 1e-8);

// Monte-Carlo J(tau) ~= (1/k) sum dist^2(X_i, tau df(x_bar)) with X_i
// standard normal.  The sample set depends on the seed only, never on
// tau (common random numbers).  Returns (value, stderr).
std::pair<double, double> j_approx(const ObjectiveSpec& spec,
                                   const Vector& x_bar, double tau, int k,
                                   std::uint64_t seed);

// Gaussian-moment kernels behind the closed forms; each equals
// E[dist^2(g, K)] for g ~ N(0,1) and the named cross-section K.
double kernel_point(double a, double tau);           // K = {a}
double kernel_interval(double tau);                  // K = [-1, 1]
double kernel_halfline_below(double tau);            // K = (-inf, 1]
double kernel_halfline_above(double tau);            // K = [1, inf)

// Closed-form J(tau) for the identity-analysis cases.  F1/F2 depend on
// (n, s) only; F3 takes the boundary profile (at_lower, at_upper,
// interior counts) -- for a binary point at_lower = n-s, at_upper = s.
double j_closed_form(ObjectiveCase f, int n, int s, double tau);
double j_closed_form_f3(int at_lower, int at_upper, int interior, double tau);

struct StatDimOptions {
  int samples = 10000;
  std::uint64_t seed = 0;
  double tol_tau = 0.0;      // 0 => 1e-3 * ||x_bar||_2
  bool force_monte_carlo = false;  // use MC even when a closed form exists
  double qp_tol = 1e-6;
  int threads = 0;           // 0 => CERTILAB_THREADS or hardware
};

// Minimizes J (closed form for F1-F3 unless forced to MC, else h_k with
// common random numbers) by bisection on a central finite-difference
// derivative.  The search interval is [0, 2||x_bar||/b] when the
// subdifferential is bounded with 0 outside (b = min-norm element); for
// the unbounded cases it is grown geometrically until the minimum is
// bracketed.
StatDimEstimate minimize_j(const ObjectiveSpec& spec, const Vector& x_bar,
                           const StatDimOptions& opts);

}  // namespace certilab
