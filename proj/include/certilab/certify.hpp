#pragma once

#include <optional>
#include <string>

#include "certilab/objectives.hpp"

namespace certilab {

enum class Verdict { unique, not_unique, indeterminate };
enum class CertifyMethod { epsilon_lp, exact_duality };

std::string verdict_name(Verdict v);

struct CertificateWitness {
  Vector y;        // measurement multiplier
  Vector alpha;    // full-length analysis coefficient (alpha_{Lc} = sign)
  Vector mu;       // one entry per active bound (>= 0)
  double t_star = 0.0;  // ||alpha_Lambda||_inf at the optimum
};

struct CertificateResult {
  Verdict verdict = Verdict::indeterminate;
  bool condition_i = false;         // rank test of [A; D_Lambda; Psi]
  std::optional<CertificateWitness> witness;
  std::string method;
  std::string diagnostic;           // set when the solver bailed out
};

// Uniqueness test for min ||Dx||_1 + box indicator s.t. Ax = A x_bar.
//
// epsilon_lp: minimizes t = ||alpha_Lambda||_inf subject to the dual
// certificate equalities with mu >= eps; unique iff condition (i) holds
// and t* < 1 - eps, not unique iff t* >= 1, indeterminate in between.
// exact_duality: decides strict feasibility of the certificate system
// exactly via the LP-duality test; no indeterminate zone.
CertificateResult certify_general(const Matrix& a, const ObjectiveSpec& spec,
                                  const Vector& x_bar, CertifyMethod method,
                                  double eps = 1e-8, double feas_tol = 1e-8);

// The per-case corollary tests (support/cosupport form); F3/F6 require a
// binary point.  Strict inequalities are decided by the same exact
// duality machinery as certify_general.
CertificateResult certify_specialized(const Matrix& a,
                                      const ObjectiveSpec& spec,
                                      const Vector& x_bar, double eps = 1e-8,
                                      double feas_tol = 1e-8);

// True iff {z : Mz = q, Pz < d (strictly)} is nonempty, decided by the
// dual test: v = 0 must be the only solution of
//   q'u + d'v <= 0,  M'u + P'v = 0,  v >= 0.
// Precondition: N(M') = {0} (full row rank of M).
bool strict_feasibility(const Matrix& m, const Vector& q, const Matrix& p,
                        const Vector& d, double feas_tol = 1e-8);

// Brute-force uniqueness oracle over the nullspace: true iff every
// feasible direction Zw != 0 has a positive directional derivative.
// Solves one LP per (coordinate, sign) pattern of the l-inf normalization
// w_l = +-1, |w_j| <= 1.  Test fixture only; refuses n > 20.
bool descent_cone_oracle(const Matrix& a, const ObjectiveSpec& spec,
                         const Vector& x_bar, double tol = 1e-7);

// Solves min ||Dx||_1 s.t. Ax = b, l <= x <= u by LP; returns one
// minimizer (uniqueness is the certifier's business).
Vector recover(const Matrix& a, const Vector& b, const ObjectiveSpec& spec,
               double feas_tol = 1e-8);

}  // namespace certilab
