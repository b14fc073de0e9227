#pragma once

#include <optional>
#include <string>
#include <vector>

#include "certilab/matrix.hpp"

namespace certilab {

// The six regularizers: f = ||D x||_1 + indicator of [l,u].
//   F1: ||x||_1               F4: ||D x||_1
//   F2: ||x||_1, x >= 0       F5: ||D x||_1, x >= 0
//   F3: ||x||_1, x in [0,1]   F6: ||D x||_1, x in [0,1]
enum class ObjectiveCase { F1, F2, F3, F4, F5, F6 };

inline bool has_identity_analysis(ObjectiveCase c) {
  return c == ObjectiveCase::F1 || c == ObjectiveCase::F2 ||
         c == ObjectiveCase::F3;
}

// Activity tolerance for the combinatorial index-set decisions; generators
// emit exact zeros so a fixed small value is safe.
inline constexpr double kActTol = 1e-9;

struct ObjectiveSpec {
  ObjectiveCase f = ObjectiveCase::F1;
  Matrix analysis;     // D; unused when identity_analysis is set
  bool identity_analysis = true;
  Vector lower;        // entries in R or -inf
  Vector upper;        // entries in R or +inf
  int n = 0;

  int p() const {
    return identity_analysis ? n : static_cast<int>(analysis.rows());
  }
  Vector apply_analysis(const Vector& x) const {
    return identity_analysis ? x : Vector(analysis * x);
  }
  // D' w restricted to the rows listed in `rows` of D.
  Vector analysis_t_times(const std::vector<int>& rows, const Vector& w) const;
  Matrix dense_analysis() const;

  bool in_box(const Vector& x, double tol) const;
  void validate() const;
};

// D = identity cases (F1-F3); bounds fixed by the case.
ObjectiveSpec make_objective(ObjectiveCase f, int n);
// Analysis cases (F4-F6) with a caller-supplied D.
ObjectiveSpec make_objective(ObjectiveCase f, Matrix analysis);

// CLI spelling: f1, f2, f3, f4-1d, f4-2d, ..., f6-2d.  The 1d/2d suffix
// selects D = diff_operator_1d(n) or gradient_operator_2d(N, N); `n` is
// the signal length (a perfect square for the 2d variants).
ObjectiveSpec make_objective_by_name(const std::string& name, int n);
std::string objective_case_name(ObjectiveCase f);

struct IndexSets {
  std::vector<int> support;        // S: |x_i| > act_tol
  std::vector<int> active_lower;   // S_l
  std::vector<int> active_upper;   // S_u
  std::vector<int> inactive;       // S_lu
  std::vector<int> cosupport;      // Lambda: |(Dx)_j| <= act_tol
  std::vector<int> cosupport_c;    // Lambda^c
};

IndexSets index_sets(const ObjectiveSpec& spec, const Vector& x,
                     double act_tol = kActTol);

// Diagonal n x n: -1 on S_l, +1 on S_u, 0 elsewhere.
Matrix psi_matrix(const ObjectiveSpec& spec, const IndexSets& sets);

// Polyhedral description of the subdifferential at x:
//   v in df(x)  iff  v = fixed + bounded_t * alpha + sum mu_i * ray_i,
//   ||alpha||_inf <= 1, mu >= 0.
struct SubdiffDescription {
  Vector fixed;                 // y0 = D_{Lc}' sign(D_{Lc} x)
  Matrix bounded_t;             // D_Lambda' as n x |Lambda|
  std::vector<int> ray_index;   // coordinate of each ray
  std::vector<double> ray_sign; // -1 on S_l, +1 on S_u
  IndexSets sets;
  bool separable = false;       // D = I: one interval/half-line per coord

  int num_rays() const { return static_cast<int>(ray_index.size()); }
  Matrix ray_columns(int n) const;  // n x num_rays
};

SubdiffDescription subdiff_description(const ObjectiveSpec& spec,
                                       const Vector& x,
                                       double act_tol = kActTol);

// ||Dx||_1, or +inf when x leaves [l,u] by more than act_tol.
double objective_value(const ObjectiveSpec& spec, const Vector& x,
                       double act_tol = kActTol);

// One-sided directional derivative f'(x; d); +inf when d pushes against
// an active bound.
double directional_derivative(const ObjectiveSpec& spec, const Vector& x,
                              const Vector& d, const IndexSets& sets);

// Feasibility test of v in df(x) via the parametrization above (LP);
// used by property tests.
bool subdiff_contains(const ObjectiveSpec& spec, const Vector& x,
                      const Vector& v, double tol = 1e-7);

}  // namespace certilab
