#include "certilab/lp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace certilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bounded-variable primal simplex on the slack-extended standard form
//   min c'x  s.t.  Gx = h,  lo <= x <= hi,
// with an appended artificial block for phase 1.  Nonbasic variables rest
// on a bound (free ones at 0); the basis inverse is kept explicitly and
// refreshed periodically against drift.
class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& p, double feas_tol)
      : feas_tol_(feas_tol) {
    const int n = p.num_vars();
    const int me = static_cast<int>(p.eq_lhs.rows());
    const int mi = static_cast<int>(p.ineq_lhs.rows());
    m_ = me + mi;
    n_real_ = n + mi;
    n_total_ = n_real_ + m_;
    me_ = me;

    G_.resize(m_, n_total_);
    G_.setZero();
    if (me > 0) G_.block(0, 0, me, n) = p.eq_lhs;
    if (mi > 0) {
      G_.block(me, 0, mi, n) = p.ineq_lhs;
      G_.block(me, n, mi, mi) = Matrix::Identity(mi, mi);
    }
    h_.resize(m_);
    if (me > 0) h_.head(me) = p.eq_rhs;
    if (mi > 0) h_.tail(mi) = p.ineq_rhs;

    lo_ = Vector::Constant(n_total_, -kInf);
    hi_ = Vector::Constant(n_total_, kInf);
    if (p.var_lower.size() > 0) lo_.head(n) = p.var_lower;
    if (p.var_upper.size() > 0) hi_.head(n) = p.var_upper;
    for (int j = n; j < n_real_; ++j) lo_(j) = 0.0;  // slacks
    for (int j = n_real_; j < n_total_; ++j) lo_(j) = 0.0;

    cost_ = Vector::Zero(n_total_);
    cost_.head(n) = p.objective;

    scale_h_ = m_ > 0 ? 1.0 + h_.cwiseAbs().maxCoeff() : 1.0;
  }

  LpSolution run() {
    LpSolution sol;
    for (int j = 0; j < n_total_; ++j) {
      if (lo_(j) > hi_(j) + feas_tol_) {
        sol.status = LpStatus::infeasible;
        return sol;
      }
    }
    init_phase1();
    Vector c1 = Vector::Zero(n_total_);
    c1.segment(n_real_, m_).setConstant(1.0);
    const PivotOutcome ph1 = iterate(c1);
    if (ph1 == PivotOutcome::unbounded) {
      throw SolverFailure("simplex: phase 1 reported unbounded");
    }
    const double infeas = phase1_objective();
    if (infeas > feas_tol_ * scale_h_ * 10.0) {
      sol.status = LpStatus::infeasible;
      sol.iterations = iterations_;
      return sol;
    }
    drive_out_artificials();
    for (int j = n_real_; j < n_total_; ++j) {
      lo_(j) = 0.0;
      hi_(j) = 0.0;
      x_(j) = 0.0;
    }
    const PivotOutcome ph2 = iterate(cost_);
    sol.iterations = iterations_;
    if (ph2 == PivotOutcome::unbounded) {
      sol.status = LpStatus::unbounded;
      return sol;
    }
    extract(sol);
    return sol;
  }

 private:
  enum class PivotOutcome { optimal, unbounded };

  void init_phase1() {
    x_.resize(n_total_);
    status_.assign(n_total_, Status::nonbasic);
    for (int j = 0; j < n_real_; ++j) x_(j) = initial_value(j);
    basis_.resize(m_);
    basis_pos_.assign(n_total_, -1);
    Vector r = h_;
    if (n_real_ > 0) {
      r.noalias() -= G_.leftCols(n_real_) * x_.head(n_real_);
    }
    Binv_ = Matrix::Identity(m_, m_);
    for (int i = 0; i < m_; ++i) {
      const int a = n_real_ + i;
      const double sigma = (r(i) < 0.0) ? -1.0 : 1.0;
      G_(i, a) = sigma;
      Binv_(i, i) = sigma;
      x_(a) = std::abs(r(i));
      basis_[i] = a;
      basis_pos_[a] = i;
      status_[a] = Status::basic;
    }
    iterations_ = 0;
    degenerate_run_ = 0;
    bland_ = false;
  }

  double initial_value(int j) const {
    if (std::isfinite(lo_(j))) {
      if (std::isfinite(hi_(j)) && std::abs(hi_(j)) < std::abs(lo_(j))) {
        return hi_(j);
      }
      return lo_(j);
    }
    if (std::isfinite(hi_(j))) return hi_(j);
    return 0.0;
  }

  double phase1_objective() const {
    double s = 0.0;
    for (int j = n_real_; j < n_total_; ++j) s += x_(j);
    return s;
  }

  // One simplex phase under objective c; returns optimal or unbounded.
  PivotOutcome iterate(const Vector& c) {
    const int cap = 50 * (n_total_ + m_) + 200;
    const double dtol =
        std::max(1e-11, 0.01 * feas_tol_) * (1.0 + c.cwiseAbs().maxCoeff());
    Vector y(m_), d(n_total_), w(m_);
    while (true) {
      if (iterations_ > cap) {
        throw SolverFailure("simplex: pivot cap exceeded");
      }
      if (m_ > 0) {
        Vector cb(m_);
        for (int i = 0; i < m_; ++i) cb(i) = c(basis_[i]);
        y.noalias() = Binv_.transpose() * cb;
        d.noalias() = c - G_.transpose() * y;
      } else {
        d = c;
      }

      int enter = -1;
      double enter_dir = 0.0;
      double best = dtol;
      for (int j = 0; j < n_total_; ++j) {
        if (status_[j] == Status::basic) continue;
        if (lo_(j) == hi_(j)) continue;  // fixed
        const bool at_lo = std::isfinite(lo_(j)) && x_(j) <= lo_(j) + 1e-30 +
                               feas_tol_ * (1.0 + std::abs(lo_(j)));
        const bool at_hi = std::isfinite(hi_(j)) && x_(j) >= hi_(j) - 1e-30 -
                               feas_tol_ * (1.0 + std::abs(hi_(j)));
        double viol = 0.0, dir = 0.0;
        if (at_lo && d(j) < -dtol) {
          viol = -d(j);
          dir = 1.0;
        } else if (at_hi && d(j) > dtol) {
          viol = d(j);
          dir = -1.0;
        } else if (!at_lo && !at_hi && std::abs(d(j)) > dtol) {
          viol = std::abs(d(j));
          dir = d(j) > 0.0 ? -1.0 : 1.0;
        } else {
          continue;
        }
        if (bland_) {
          enter = j;
          enter_dir = dir;
          break;
        }
        if (viol > best) {
          best = viol;
          enter = j;
          enter_dir = dir;
        }
      }
      if (enter < 0) return PivotOutcome::optimal;

      if (m_ > 0) {
        w.noalias() = Binv_ * G_.col(enter);
      }
      // Largest step keeping every basic variable inside its bounds and
      // the entering variable inside its own range.
      double step = kInf;
      int leave_row = -1;
      double leave_to = 0.0;  // bound the leaving variable lands on
      const double range =
          (std::isfinite(lo_(enter)) && std::isfinite(hi_(enter)))
              ? hi_(enter) - lo_(enter)
              : kInf;
      if (range < step) {
        step = range;
        leave_row = -2;  // bound flip
      }
      const double ptol = 1e-9;
      for (int i = 0; i < m_; ++i) {
        const double delta = -enter_dir * w(i);  // change of basic i per step
        const int v = basis_[i];
        double limit = kInf, to = 0.0;
        if (delta < -ptol && std::isfinite(lo_(v))) {
          limit = (x_(v) - lo_(v)) / (-delta);
          to = lo_(v);
        } else if (delta > ptol && std::isfinite(hi_(v))) {
          limit = (hi_(v) - x_(v)) / delta;
          to = hi_(v);
        } else {
          continue;
        }
        if (limit < -feas_tol_) limit = 0.0;
        const bool better =
            limit < step - 1e-12 ||
            (limit < step + 1e-12 && leave_row >= 0 &&
             (bland_ ? v < basis_[leave_row]
                     : std::abs(w(i)) > std::abs(w(leave_row))));
        if (better) {
          step = std::max(limit, 0.0);
          leave_row = i;
          leave_to = to;
        }
      }
      if (!std::isfinite(step)) return PivotOutcome::unbounded;

      if (step < 1e-11 * (1.0 + std::abs(x_(enter)))) {
        if (++degenerate_run_ > 60) bland_ = true;
      } else {
        degenerate_run_ = 0;
      }

      if (leave_row == -2) {
        // Bound flip: no basis change.
        x_(enter) += enter_dir * step;
        for (int i = 0; i < m_; ++i) x_(basis_[i]) -= enter_dir * step * w(i);
      } else {
        const int leave_var = basis_[leave_row];
        x_(enter) += enter_dir * step;
        for (int i = 0; i < m_; ++i) x_(basis_[i]) -= enter_dir * step * w(i);
        x_(leave_var) = leave_to;
        basis_[leave_row] = enter;
        basis_pos_[enter] = leave_row;
        basis_pos_[leave_var] = -1;
        status_[enter] = Status::basic;
        status_[leave_var] = Status::nonbasic;
        update_inverse(w, leave_row);
      }
      ++iterations_;
      if (iterations_ % 256 == 0) refactorize();
    }
  }

  void update_inverse(const Vector& w, int r) {
    const double wr = w(r);
    if (std::abs(wr) < 1e-12) {
      refactorize();
      return;
    }
    Binv_.row(r) /= wr;
    Vector w2 = w;
    w2(r) = 0.0;
    Binv_.noalias() -= w2 * Binv_.row(r);
  }

  void refactorize() {
    if (m_ == 0) return;
    Matrix b(m_, m_);
    for (int i = 0; i < m_; ++i) b.col(i) = G_.col(basis_[i]);
    Eigen::PartialPivLU<Matrix> lu(b);
    Binv_ = lu.inverse();
    // Recompute basic values from the nonbasic assignment.
    Vector r = h_;
    for (int j = 0; j < n_total_; ++j) {
      if (status_[j] != Status::basic && x_(j) != 0.0) r -= G_.col(j) * x_(j);
    }
    Vector xb = Binv_ * r;
    for (int i = 0; i < m_; ++i) x_(basis_[i]) = xb(i);
  }

  // Pivot basic artificials out wherever a real column can replace them;
  // rows that admit no replacement are redundant and keep their artificial
  // pinned at zero.
  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_real_) continue;
      Eigen::RowVectorXd row = Binv_.row(i) * G_.leftCols(n_real_);
      int pick = -1;
      double best = 1e-7;
      for (int j = 0; j < n_real_; ++j) {
        if (status_[j] == Status::basic || lo_(j) == hi_(j)) continue;
        if (std::abs(row(j)) > best) {
          best = std::abs(row(j));
          pick = j;
        }
      }
      if (pick < 0) continue;
      Vector w = Binv_ * G_.col(pick);
      const int leave_var = basis_[i];
      const double xv = x_(pick);
      basis_[i] = pick;
      basis_pos_[pick] = i;
      basis_pos_[leave_var] = -1;
      status_[pick] = Status::basic;
      status_[leave_var] = Status::nonbasic;
      x_(leave_var) = 0.0;
      x_(pick) = xv;  // degenerate exchange: values unchanged
      update_inverse(w, i);
    }
  }

  void extract(LpSolution& sol) {
    sol.status = LpStatus::optimal;
    const int mi = m_ - me_;
    const int n = n_real_ - mi;
    sol.primal = x_.head(n);
    sol.objective_value = cost_.head(n).dot(sol.primal);
    Vector y = Vector::Zero(m_);
    if (m_ > 0) {
      Vector cb(m_);
      for (int i = 0; i < m_; ++i) cb(i) = cost_(basis_[i]);
      y.noalias() = Binv_.transpose() * cb;
    }
    sol.dual_eq = -y.head(me_);
    sol.dual_ineq = -y.tail(mi);
    Vector d = cost_ - G_.transpose() * y;
    sol.reduced_costs = d.head(n);
  }

  double feas_tol_;
  int m_ = 0, me_ = 0, n_real_ = 0, n_total_ = 0;
  Matrix G_, Binv_;
  Vector h_, lo_, hi_, cost_, x_;
  enum class Status { basic, nonbasic };
  std::vector<Status> status_;
  std::vector<int> basis_, basis_pos_;
  int iterations_ = 0, degenerate_run_ = 0;
  bool bland_ = false;
  double scale_h_ = 1.0;
};

}  // namespace

void LinearProgram::validate() const {
  const int n = num_vars();
  if (n == 0) throw InvalidInput("lp: empty objective");
  if (!objective.allFinite()) throw InvalidInput("lp: non-finite objective");
  if (eq_lhs.rows() != eq_rhs.size()) throw InvalidInput("lp: eq shape");
  if (eq_lhs.rows() > 0 && eq_lhs.cols() != n) throw InvalidInput("lp: eq cols");
  if (ineq_lhs.rows() != ineq_rhs.size()) throw InvalidInput("lp: ineq shape");
  if (ineq_lhs.rows() > 0 && ineq_lhs.cols() != n) {
    throw InvalidInput("lp: ineq cols");
  }
  if (var_lower.size() > 0 && var_lower.size() != n) {
    throw InvalidInput("lp: lower size");
  }
  if (var_upper.size() > 0 && var_upper.size() != n) {
    throw InvalidInput("lp: upper size");
  }
}

LpSolution solve_lp(const LinearProgram& problem, double feas_tol) {
  problem.validate();
  BoundedSimplex solver(problem, feas_tol);
  return solver.run();
}

double lp_kkt_residual(const LinearProgram& p, const LpSolution& sol) {
  if (sol.status != LpStatus::optimal) return 0.0;
  const int n = p.num_vars();
  const Vector& x = sol.primal;
  double r = 0.0;
  if (p.eq_lhs.rows() > 0) {
    r = std::max(r, (p.eq_lhs * x - p.eq_rhs).cwiseAbs().maxCoeff());
  }
  Vector slack;
  if (p.ineq_lhs.rows() > 0) {
    slack = p.ineq_rhs - p.ineq_lhs * x;
    r = std::max(r, std::max(0.0, -slack.minCoeff()));
  }
  for (int j = 0; j < n; ++j) {
    if (p.var_lower.size() > 0 && std::isfinite(p.var_lower(j))) {
      r = std::max(r, p.var_lower(j) - x(j));
    }
    if (p.var_upper.size() > 0 && std::isfinite(p.var_upper(j))) {
      r = std::max(r, x(j) - p.var_upper(j));
    }
  }
  // Stationarity: c + eq'*nu + ineq'*lambda = reduced costs.
  Vector grad = p.objective;
  if (p.eq_lhs.rows() > 0) grad += p.eq_lhs.transpose() * sol.dual_eq;
  if (p.ineq_lhs.rows() > 0) grad += p.ineq_lhs.transpose() * sol.dual_ineq;
  r = std::max(r, (grad - sol.reduced_costs).cwiseAbs().maxCoeff());
  // Dual sign and complementary slackness.
  if (sol.dual_ineq.size() > 0) {
    r = std::max(r, std::max(0.0, -sol.dual_ineq.minCoeff()));
    for (int i = 0; i < slack.size(); ++i) {
      r = std::max(r, std::abs(sol.dual_ineq(i) * slack(i)));
    }
  }
  // Bound multipliers must point the right way.
  for (int j = 0; j < n; ++j) {
    const double z = sol.reduced_costs(j);
    const bool at_lo = p.var_lower.size() > 0 &&
                       std::isfinite(p.var_lower(j)) &&
                       x(j) <= p.var_lower(j) + 1e-7;
    const bool at_hi = p.var_upper.size() > 0 &&
                       std::isfinite(p.var_upper(j)) &&
                       x(j) >= p.var_upper(j) - 1e-7;
    if (at_lo && !at_hi) r = std::max(r, -z);
    if (at_hi && !at_lo) r = std::max(r, z);
    if (!at_lo && !at_hi) r = std::max(r, std::abs(z));
  }
  return r;
}

}  // namespace certilab
