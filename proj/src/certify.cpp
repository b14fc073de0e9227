#include "certilab/certify.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "certilab/linalg.hpp"
#include "certilab/lp.hpp"

namespace certilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Above this dimension the epsilon-LP works on the nullspace of A with the
// max-norm constraint folded into variable bounds (feasibility probes at
// the classification thresholds instead of one min-t solve).
constexpr int kBigPathN = 301;

double sign_of(double v) { return v > 0.0 ? 1.0 : -1.0; }

Matrix rows_of(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(k) = m.row(idx[k]);
  return out;
}

Matrix cols_of(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = m.col(idx[k]);
  return out;
}

struct CertificateSystem {
  // Equality  bounded*alpha + rays*mu - A'y = q  with  q = -fixed,
  // ||alpha||_inf < 1 and mu > 0 demanded strictly.
  Matrix bounded;   // n x nl  (D_Lambda')
  Matrix rays;      // n x nact
  Vector q;
  SubdiffDescription sd;
  bool condition_i = false;
  bool rank_skipped = false;  // N(Psi) = {0} makes (i) automatic
};

CertificateSystem build_system(const Matrix& a, const ObjectiveSpec& spec,
                               const Vector& x_bar) {
  CertificateSystem cs;
  cs.sd = subdiff_description(spec, x_bar);
  cs.bounded = cs.sd.bounded_t;
  cs.rays = cs.sd.ray_columns(spec.n);
  cs.q = -cs.sd.fixed;
  if (cs.sd.sets.inactive.empty()) {
    // Every coordinate rests on a bound, so N(Psi) = {0} and the rank
    // condition holds automatically (the F3/F6 binary situation).
    cs.condition_i = true;
    cs.rank_skipped = true;
  } else {
    std::vector<Matrix> blocks;
    blocks.push_back(a);
    const Matrix d_lambda =
        cs.sd.bounded_t.transpose();  // |Lambda| x n rows of D
    if (d_lambda.rows() > 0) blocks.push_back(d_lambda);
    Matrix psi = Matrix::Zero(cs.sd.num_rays(), spec.n);
    for (int k = 0; k < cs.sd.num_rays(); ++k) {
      psi(k, cs.sd.ray_index[k]) = cs.sd.ray_sign[k];
    }
    if (psi.rows() > 0) blocks.push_back(psi);
    cs.condition_i = stacked_full_column_rank(blocks);
  }
  return cs;
}

// Witness for the epsilon-LP primal z = (t, alpha_L, mu, y).
CertificateWitness unpack_witness(const CertificateSystem& cs,
                                  const Vector& z, int nl, int nact, int m,
                                  const ObjectiveSpec& spec,
                                  const Vector& x_bar) {
  CertificateWitness w;
  w.t_star = z(0);
  w.alpha = Vector::Zero(spec.p());
  const Vector dx = spec.apply_analysis(x_bar);
  for (int j : cs.sd.sets.cosupport_c) w.alpha(j) = sign_of(dx(j));
  for (int k = 0; k < nl; ++k) w.alpha(cs.sd.sets.cosupport[k]) = z(1 + k);
  w.mu = z.segment(1 + nl, nact);
  w.y = z.tail(m);
  return w;
}

// Small-instance epsilon-LP: minimize t = ||alpha_Lambda||_inf directly.
CertificateResult epsilon_lp_direct(const Matrix& a,
                                    const ObjectiveSpec& spec,
                                    const Vector& x_bar,
                                    const CertificateSystem& cs, double eps,
                                    double feas_tol) {
  const int n = spec.n;
  const int m = static_cast<int>(a.rows());
  const int nl = static_cast<int>(cs.bounded.cols());
  const int nact = static_cast<int>(cs.rays.cols());
  const int nv = 1 + nl + nact + m;

  LinearProgram lp;
  lp.objective = Vector::Zero(nv);
  lp.objective(0) = 1.0;
  lp.eq_lhs.resize(n, nv);
  lp.eq_lhs.setZero();
  if (nl > 0) lp.eq_lhs.middleCols(1, nl) = cs.bounded;
  if (nact > 0) lp.eq_lhs.middleCols(1 + nl, nact) = cs.rays;
  lp.eq_lhs.rightCols(m) = -a.transpose();
  lp.eq_rhs = cs.q;
  lp.ineq_lhs.resize(2 * nl, nv);
  lp.ineq_lhs.setZero();
  for (int k = 0; k < nl; ++k) {
    lp.ineq_lhs(k, 1 + k) = 1.0;        //  alpha_k - t <= 0
    lp.ineq_lhs(k, 0) = -1.0;
    lp.ineq_lhs(nl + k, 1 + k) = -1.0;  // -alpha_k - t <= 0
    lp.ineq_lhs(nl + k, 0) = -1.0;
  }
  lp.ineq_rhs = Vector::Zero(2 * nl);
  lp.var_lower = Vector::Constant(nv, -kInf);
  lp.var_upper = Vector::Constant(nv, kInf);
  lp.var_lower(0) = 0.0;
  for (int k = 0; k < nact; ++k) lp.var_lower(1 + nl + k) = eps;

  CertificateResult res;
  res.method = "epsilon_lp";
  res.condition_i = cs.condition_i;
  const LpSolution sol = solve_lp(lp, feas_tol);
  if (sol.status == LpStatus::optimal) {
    const double t_star = sol.objective_value;
    res.witness = unpack_witness(cs, sol.primal, nl, nact, m, spec, x_bar);
    if (!cs.condition_i || t_star >= 1.0) {
      res.verdict = Verdict::not_unique;
    } else if (t_star < 1.0 - eps) {
      res.verdict = Verdict::unique;
    } else {
      res.verdict = Verdict::indeterminate;
      res.diagnostic = "t* inside the epsilon risk zone";
    }
    if (res.verdict != Verdict::unique) res.witness.reset();
    return res;
  }
  if (sol.status == LpStatus::infeasible) {
    // Distinguish "no certificate at all" from "mu >= eps is too strict".
    for (int k = 0; k < nact; ++k) lp.var_lower(1 + nl + k) = 0.0;
    const LpSolution relaxed = solve_lp(lp, feas_tol);
    if (relaxed.status == LpStatus::infeasible) {
      res.verdict = Verdict::not_unique;
    } else {
      res.verdict = Verdict::indeterminate;
      res.diagnostic = "certificate system needs mu below eps";
    }
    return res;
  }
  throw SolverFailure("epsilon_lp: unexpected unbounded status");
}

// Feasibility of  Z'(bounded*alpha + rays*mu) = Z'q  with box bounds; the
// core of the nullspace-projected probes.
bool nullspace_probe(const Matrix& zt_bounded, const Matrix& zt_rays,
                     const Vector& zq, double alpha_box, double mu_floor,
                     double feas_tol, Vector* out_alpha, Vector* out_mu) {
  const int rows = static_cast<int>(zq.size());
  const int nl = static_cast<int>(zt_bounded.cols());
  const int nact = static_cast<int>(zt_rays.cols());
  const int nv = nl + nact;
  if (nv == 0) {
    return rows == 0 || zq.cwiseAbs().maxCoeff() <= feas_tol * 10.0;
  }
  LinearProgram lp;
  lp.objective = Vector::Zero(nv);
  lp.eq_lhs.resize(rows, nv);
  if (nl > 0) lp.eq_lhs.leftCols(nl) = zt_bounded;
  if (nact > 0) lp.eq_lhs.rightCols(nact) = zt_rays;
  lp.eq_rhs = zq;
  lp.var_lower = Vector::Constant(nv, -alpha_box);
  lp.var_upper = Vector::Constant(nv, alpha_box);
  for (int k = 0; k < nact; ++k) {
    lp.var_lower(nl + k) = mu_floor;
    lp.var_upper(nl + k) = kInf;
  }
  const LpSolution sol = solve_lp(lp, feas_tol);
  if (sol.status != LpStatus::optimal) return false;
  if (out_alpha) *out_alpha = sol.primal.head(nl);
  if (out_mu) *out_mu = sol.primal.tail(nact);
  return true;
}

CertificateResult epsilon_lp_nullspace(const Matrix& a,
                                       const ObjectiveSpec& spec,
                                       const Vector& x_bar,
                                       const CertificateSystem& cs,
                                       double eps, double feas_tol) {
  CertificateResult res;
  res.method = "epsilon_lp";
  res.condition_i = cs.condition_i;
  const Matrix z = nullspace_basis(a);
  const Matrix zt_bounded = z.transpose() * cs.bounded;
  const Matrix zt_rays = z.transpose() * cs.rays;
  const Vector zq = z.transpose() * cs.q;

  Vector alpha, mu;
  if (nullspace_probe(zt_bounded, zt_rays, zq, 1.0 - eps, eps, feas_tol,
                      &alpha, &mu)) {
    if (!cs.condition_i) {
      res.verdict = Verdict::not_unique;
      return res;
    }
    res.verdict = Verdict::unique;
    CertificateWitness w;
    const int nl = static_cast<int>(cs.bounded.cols());
    w.alpha = Vector::Zero(spec.p());
    const Vector dx = spec.apply_analysis(x_bar);
    for (int j : cs.sd.sets.cosupport_c) w.alpha(j) = sign_of(dx(j));
    for (int k = 0; k < nl; ++k) w.alpha(cs.sd.sets.cosupport[k]) = alpha(k);
    w.mu = mu;
    w.t_star = nl > 0 ? alpha.cwiseAbs().maxCoeff() : 0.0;
    // Recover y from D'alpha + Psi mu = A'y (consistent by construction).
    Vector v = cs.sd.fixed;
    if (nl > 0) v += cs.bounded * alpha;
    if (mu.size() > 0) v += cs.rays * mu;
    w.y = a.transpose().colPivHouseholderQr().solve(v);
    res.witness = w;
    return res;
  }
  if (nullspace_probe(zt_bounded, zt_rays, zq, 1.0, eps, feas_tol, nullptr,
                      nullptr)) {
    res.verdict = Verdict::indeterminate;
    res.diagnostic = "t* inside the epsilon risk zone";
    return res;
  }
  if (nullspace_probe(zt_bounded, zt_rays, zq, 1.0, 0.0, feas_tol, nullptr,
                      nullptr)) {
    res.verdict = Verdict::indeterminate;
    res.diagnostic = "certificate system needs mu below eps";
    return res;
  }
  res.verdict = Verdict::not_unique;
  return res;
}

// Margin LP: max s  s.t.  Mz = q, Pz + s <= d, 0 <= s <= 1.  Produces a
// strictly interior witness after an exact-duality "unique" verdict.
bool margin_witness(const Matrix& m_mat, const Vector& q, const Matrix& p_mat,
                    const Vector& d, double feas_tol, Vector* z_out,
                    double* s_out) {
  const int nz = static_cast<int>(m_mat.cols());
  const int nv = nz + 1;
  LinearProgram lp;
  lp.objective = Vector::Zero(nv);
  lp.objective(nz) = -1.0;  // max s
  lp.eq_lhs.resize(m_mat.rows(), nv);
  lp.eq_lhs.setZero();
  lp.eq_lhs.leftCols(nz) = m_mat;
  lp.eq_rhs = q;
  lp.ineq_lhs.resize(p_mat.rows(), nv);
  lp.ineq_lhs.leftCols(nz) = p_mat;
  lp.ineq_lhs.rightCols(1).setOnes();
  lp.ineq_rhs = d;
  lp.var_lower = Vector::Constant(nv, -kInf);
  lp.var_upper = Vector::Constant(nv, kInf);
  lp.var_lower(nz) = 0.0;
  lp.var_upper(nz) = 1.0;
  const LpSolution sol = solve_lp(lp, feas_tol);
  if (sol.status != LpStatus::optimal) return false;
  if (z_out) *z_out = sol.primal.head(nz);
  if (s_out) *s_out = sol.primal(nz);
  return true;
}

CertificateResult exact_duality(const Matrix& a, const ObjectiveSpec& spec,
                                const Vector& x_bar,
                                const CertificateSystem& cs, double feas_tol) {
  CertificateResult res;
  res.method = "exact_duality";
  res.condition_i = cs.condition_i;
  if (!cs.condition_i) {
    res.verdict = Verdict::not_unique;
    return res;
  }
  const int n = spec.n;
  const int m = static_cast<int>(a.rows());
  const int nl = static_cast<int>(cs.bounded.cols());
  const int nact = static_cast<int>(cs.rays.cols());
  const int nz = nl + nact + m;

  Matrix m_mat(n, nz);
  if (nl > 0) m_mat.leftCols(nl) = cs.bounded;
  if (nact > 0) m_mat.middleCols(nl, nact) = cs.rays;
  m_mat.rightCols(m) = -a.transpose();
  Matrix p_mat = Matrix::Zero(2 * nl + nact, nz);
  Vector d(2 * nl + nact);
  for (int k = 0; k < nl; ++k) {
    p_mat(k, k) = 1.0;
    p_mat(nl + k, k) = -1.0;
    d(k) = 1.0;
    d(nl + k) = 1.0;
  }
  for (int k = 0; k < nact; ++k) {
    p_mat(2 * nl + k, nl + k) = -1.0;
    d(2 * nl + k) = 0.0;
  }

  const bool strict = strict_feasibility(m_mat, cs.q, p_mat, d, feas_tol);
  if (!strict) {
    res.verdict = Verdict::not_unique;
    return res;
  }
  res.verdict = Verdict::unique;
  Vector zvec;
  double s = 0.0;
  if (margin_witness(m_mat, cs.q, p_mat, d, feas_tol, &zvec, &s)) {
    CertificateWitness w;
    w.alpha = Vector::Zero(spec.p());
    const Vector dx = spec.apply_analysis(x_bar);
    for (int j : cs.sd.sets.cosupport_c) w.alpha(j) = sign_of(dx(j));
    for (int k = 0; k < nl; ++k) {
      w.alpha(cs.sd.sets.cosupport[k]) = zvec(k);
    }
    w.mu = zvec.segment(nl, nact);
    w.y = -zvec.tail(m);
    w.t_star = nl > 0 ? zvec.head(nl).cwiseAbs().maxCoeff() : 0.0;
    res.witness = w;
  }
  return res;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::unique: return "unique";
    case Verdict::not_unique: return "not_unique";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "?";
}

CertificateResult certify_general(const Matrix& a, const ObjectiveSpec& spec,
                                  const Vector& x_bar, CertifyMethod method,
                                  double eps, double feas_tol) {
  spec.validate();
  if (a.cols() != spec.n || x_bar.size() != spec.n) {
    throw InvalidInput("certify: dimension mismatch");
  }
  if (!spec.in_box(x_bar, kActTol)) {
    throw InfeasibleError("certify: point violates the box bounds");
  }
  try {
    const CertificateSystem cs = build_system(a, spec, x_bar);
    if (method == CertifyMethod::exact_duality) {
      return exact_duality(a, spec, x_bar, cs, feas_tol);
    }
    if (spec.n >= kBigPathN) {
      return epsilon_lp_nullspace(a, spec, x_bar, cs, eps, feas_tol);
    }
    return epsilon_lp_direct(a, spec, x_bar, cs, eps, feas_tol);
  } catch (const SolverFailure& e) {
    CertificateResult res;
    res.method = method == CertifyMethod::exact_duality ? "exact_duality"
                                                        : "epsilon_lp";
    res.verdict = Verdict::indeterminate;
    res.diagnostic = e.what();
    return res;
  }
}

bool strict_feasibility(const Matrix& m, const Vector& q, const Matrix& p,
                        const Vector& d, double feas_tol) {
  if (m.rows() != q.size() || p.rows() != d.size()) {
    throw InvalidInput("strict_feasibility: shape mismatch");
  }
  if (m.rows() > 0 && p.rows() > 0 && m.cols() != p.cols()) {
    throw InvalidInput("strict_feasibility: column mismatch");
  }
  if (m.rows() > 0 && rank_of(m) < m.rows()) {
    throw InvalidInput("strict_feasibility: N(M') != {0} precondition");
  }
  const int nz = static_cast<int>(p.rows() > 0 ? p.cols() : m.cols());
  const int nu = static_cast<int>(m.rows());
  const int nvv = static_cast<int>(p.rows());
  // v = 0 must be the only solution of
  //   q'u + d'v <= 0,  M'u + P'v = 0,  v >= 0;
  // the solution set is a cone, so cap sum(v) and maximize it.
  LinearProgram lp;
  const int nv = nu + nvv;
  lp.objective = Vector::Zero(nv);
  lp.objective.tail(nvv).setConstant(-1.0);  // max sum v
  lp.eq_lhs.resize(nz, nv);
  lp.eq_lhs.setZero();
  if (nu > 0) lp.eq_lhs.leftCols(nu) = m.transpose();
  if (nvv > 0) lp.eq_lhs.rightCols(nvv) = p.transpose();
  lp.eq_rhs = Vector::Zero(nz);
  lp.ineq_lhs.resize(2, nv);
  lp.ineq_lhs.setZero();
  if (nu > 0) lp.ineq_lhs.row(0).head(nu) = q.transpose();
  if (nvv > 0) lp.ineq_lhs.row(0).tail(nvv) = d.transpose();
  if (nvv > 0) lp.ineq_lhs.row(1).tail(nvv).setOnes();
  lp.ineq_rhs.resize(2);
  lp.ineq_rhs << 0.0, 1.0;
  lp.var_lower = Vector::Constant(nv, -kInf);
  lp.var_upper = Vector::Constant(nv, kInf);
  for (int k = nu; k < nv; ++k) lp.var_lower(k) = 0.0;
  const LpSolution sol = solve_lp(lp, feas_tol);
  if (sol.status == LpStatus::unbounded) return false;  // v-ray exists
  if (sol.status != LpStatus::optimal) {
    throw SolverFailure("strict_feasibility: dual test failed to solve");
  }
  return -sol.objective_value < 0.5;
}

CertificateResult certify_specialized(const Matrix& a,
                                      const ObjectiveSpec& spec,
                                      const Vector& x_bar, double eps,
                                      double feas_tol) {
  spec.validate();
  if (!spec.in_box(x_bar, kActTol)) {
    throw InfeasibleError("certify: point violates the box bounds");
  }
  const bool box_case =
      spec.f == ObjectiveCase::F3 || spec.f == ObjectiveCase::F6;
  if (box_case) {
    for (int i = 0; i < spec.n; ++i) {
      if (std::abs(x_bar(i)) > kActTol && std::abs(x_bar(i) - 1.0) > kActTol) {
        throw InvalidInput(
            "certify_specialized: F3/F6 corollaries need a binary point");
      }
    }
  }
  (void)eps;  // strictness is decided exactly; eps kept for CLI symmetry

  CertificateResult res;
  res.method = "specialized_" + objective_case_name(spec.f);
  const IndexSets sets = index_sets(spec, x_bar);

  try {
    if (has_identity_analysis(spec.f)) {
      // Support-space corollaries over y only.
      const std::vector<int>& s_idx = sets.support;
      std::vector<int> sc_idx;
      for (int i = 0; i < spec.n; ++i) {
        if (std::abs(x_bar(i)) <= kActTol) sc_idx.push_back(i);
      }
      const Matrix a_s = cols_of(a, s_idx);
      const Matrix a_sc = cols_of(a, sc_idx);
      const int ns = static_cast<int>(s_idx.size());
      const int nsc = static_cast<int>(sc_idx.size());
      const int m = static_cast<int>(a.rows());

      if (spec.f == ObjectiveCase::F3) {
        res.condition_i = true;  // N(Psi) = {0}
      } else {
        res.condition_i = ns == 0 || rank_of(a_s) == ns;
        if (!res.condition_i) {
          res.verdict = Verdict::not_unique;
          return res;
        }
      }

      Matrix m_mat;
      Vector q;
      Matrix p_mat;
      Vector d;
      if (spec.f == ObjectiveCase::F1) {
        // A_S'y = sign(x_S), ||A_Sc'y||_inf < 1.
        m_mat = a_s.transpose();
        q.resize(ns);
        for (int k = 0; k < ns; ++k) q(k) = sign_of(x_bar(s_idx[k]));
        p_mat.resize(2 * nsc, m);
        p_mat.topRows(nsc) = a_sc.transpose();
        p_mat.bottomRows(nsc) = -a_sc.transpose();
        d = Vector::Ones(2 * nsc);
      } else if (spec.f == ObjectiveCase::F2) {
        // A_S'y = 1, A_Sc'y < 1.
        m_mat = a_s.transpose();
        q = Vector::Ones(ns);
        p_mat = a_sc.transpose();
        d = Vector::Ones(nsc);
      } else {
        // F3: A_S'y > 1, A_Sc'y < 1 (no equality block).
        m_mat.resize(0, m);
        q.resize(0);
        p_mat.resize(ns + nsc, m);
        p_mat.topRows(ns) = -a_s.transpose();
        p_mat.bottomRows(nsc) = a_sc.transpose();
        d.resize(ns + nsc);
        d.head(ns).setConstant(-1.0);
        d.tail(nsc).setConstant(1.0);
      }

      if (!strict_feasibility(m_mat, q, p_mat, d, feas_tol)) {
        res.verdict = Verdict::not_unique;
        return res;
      }
      res.verdict = Verdict::unique;
      Vector y;
      double margin = 0.0;
      if (margin_witness(m_mat, q, p_mat, d, feas_tol, &y, &margin)) {
        CertificateWitness w;
        w.y = y;
        const Vector aty = a.transpose() * y;
        w.alpha = Vector::Zero(spec.n);
        Vector mu = Vector::Zero(spec.n);
        for (int k = 0; k < ns; ++k) {
          const int i = s_idx[k];
          if (spec.f == ObjectiveCase::F3) {
            w.alpha(i) = 1.0;
            mu(i) = aty(i) - 1.0;  // Psi_ii = +1 at the upper bound
          } else {
            w.alpha(i) = spec.f == ObjectiveCase::F2 ? 1.0
                                                     : sign_of(x_bar(i));
          }
        }
        double t_star = 0.0;
        for (int k = 0; k < nsc; ++k) {
          const int i = sc_idx[k];
          if (spec.f == ObjectiveCase::F1) {
            w.alpha(i) = aty(i);
          } else {
            // alpha_i - mu_i = A_i'y with mu_i > 0 and |alpha_i| < 1.
            w.alpha(i) = std::max(aty(i) + margin / 2.0, -1.0 + margin / 4.0);
            mu(i) = w.alpha(i) - aty(i);
          }
          t_star = std::max(t_star, std::abs(w.alpha(i)));
        }
        w.t_star = t_star;
        // Pack mu over the active-bound coordinates (rays order).
        const SubdiffDescription sd = subdiff_description(spec, x_bar);
        w.mu.resize(sd.num_rays());
        for (int k = 0; k < sd.num_rays(); ++k) {
          w.mu(k) = mu(sd.ray_index[k]);
        }
        res.witness = w;
      }
      return res;
    }

    // F4/F5/F6: the corollary conditions coincide with the general system
    // restricted to the case's Psi; reuse the exact machinery.
    const CertificateSystem cs = build_system(a, spec, x_bar);
    CertificateResult general = exact_duality(a, spec, x_bar, cs, feas_tol);
    general.method = res.method;
    return general;
  } catch (const SolverFailure& e) {
    res.verdict = Verdict::indeterminate;
    res.diagnostic = e.what();
    return res;
  }
}

bool descent_cone_oracle(const Matrix& a, const ObjectiveSpec& spec,
                         const Vector& x_bar, double tol) {
  spec.validate();
  if (spec.n > 20) {
    throw InvalidInput("descent_cone_oracle: test fixture, refuses n > 20");
  }
  if (!spec.in_box(x_bar, kActTol)) {
    throw InfeasibleError("descent_cone_oracle: infeasible point");
  }
  const IndexSets sets = index_sets(spec, x_bar);
  const Matrix z = nullspace_basis(a);
  const int dz = static_cast<int>(z.cols());
  if (dz == 0) return true;

  const Matrix dmat = spec.dense_analysis();
  const Matrix dz_mat = dmat * z;  // p x dz
  const Vector dx = spec.apply_analysis(x_bar);
  const int nl = static_cast<int>(sets.cosupport.size());

  // Objective of f'(x; Zw): fixed-sign rows plus |.| via auxiliary t.
  Vector w_lin = Vector::Zero(dz);
  for (int j : sets.cosupport_c) {
    w_lin += sign_of(dx(j)) * dz_mat.row(j).transpose();
  }

  // One LP per l-inf normalization pattern w_l = +-1.
  for (int l = 0; l < dz; ++l) {
    for (double s : {1.0, -1.0}) {
      LinearProgram lp;
      const int nv = dz + nl;
      lp.objective = Vector::Zero(nv);
      lp.objective.head(dz) = w_lin;
      lp.objective.tail(nl).setOnes();
      const int n_bound_rows = static_cast<int>(sets.active_lower.size() +
                                                sets.active_upper.size());
      lp.ineq_lhs.resize(2 * nl + n_bound_rows, nv);
      lp.ineq_lhs.setZero();
      lp.ineq_rhs = Vector::Zero(2 * nl + n_bound_rows);
      for (int k = 0; k < nl; ++k) {
        const int j = sets.cosupport[k];
        lp.ineq_lhs.row(k).head(dz) = dz_mat.row(j);
        lp.ineq_lhs(k, dz + k) = -1.0;
        lp.ineq_lhs.row(nl + k).head(dz) = -dz_mat.row(j);
        lp.ineq_lhs(nl + k, dz + k) = -1.0;
      }
      int r = 2 * nl;
      for (int i : sets.active_lower) {
        lp.ineq_lhs.row(r++).head(dz) = -z.row(i);  // (Zw)_i >= 0
      }
      for (int i : sets.active_upper) {
        lp.ineq_lhs.row(r++).head(dz) = z.row(i);   // (Zw)_i <= 0
      }
      lp.var_lower = Vector::Constant(nv, -1.0);
      lp.var_upper = Vector::Constant(nv, 1.0);
      lp.var_lower(l) = s;
      lp.var_upper(l) = s;
      for (int k = 0; k < nl; ++k) {
        lp.var_lower(dz + k) = 0.0;
        lp.var_upper(dz + k) = kInf;
      }
      const LpSolution sol = solve_lp(lp, 1e-9);
      if (sol.status == LpStatus::infeasible) continue;
      if (sol.status != LpStatus::optimal) {
        throw SolverFailure("descent_cone_oracle: pattern LP did not solve");
      }
      if (sol.objective_value <= tol) return false;
    }
  }
  return true;
}

Vector recover(const Matrix& a, const Vector& b, const ObjectiveSpec& spec,
               double feas_tol) {
  spec.validate();
  if (a.cols() != spec.n || a.rows() != b.size()) {
    throw InvalidInput("recover: dimension mismatch");
  }
  const int n = spec.n;
  const int p = spec.p();
  const int m = static_cast<int>(a.rows());
  const Matrix dmat = spec.dense_analysis();
  LinearProgram lp;
  const int nv = n + p;
  lp.objective = Vector::Zero(nv);
  lp.objective.tail(p).setOnes();
  lp.eq_lhs.resize(m, nv);
  lp.eq_lhs.setZero();
  lp.eq_lhs.leftCols(n) = a;
  lp.eq_rhs = b;
  lp.ineq_lhs.resize(2 * p, nv);
  lp.ineq_lhs.setZero();
  lp.ineq_lhs.topLeftCorner(p, n) = dmat;
  lp.ineq_lhs.topRightCorner(p, p) = -Matrix::Identity(p, p);
  lp.ineq_lhs.bottomLeftCorner(p, n) = -dmat;
  lp.ineq_lhs.bottomRightCorner(p, p) = -Matrix::Identity(p, p);
  lp.ineq_rhs = Vector::Zero(2 * p);
  lp.var_lower = Vector::Constant(nv, -kInf);
  lp.var_upper = Vector::Constant(nv, kInf);
  lp.var_lower.head(n) = spec.lower;
  lp.var_upper.head(n) = spec.upper;
  for (int k = 0; k < p; ++k) lp.var_lower(n + k) = 0.0;
  const LpSolution sol = solve_lp(lp, feas_tol);
  if (sol.status == LpStatus::infeasible) {
    throw InfeasibleError("recover: no feasible point");
  }
  if (sol.status != LpStatus::optimal) {
    throw SolverFailure("recover: LP did not reach optimality");
  }
  return sol.primal.head(n);
}

}  // namespace certilab
