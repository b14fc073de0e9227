#include "certilab/qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace certilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Part : unsigned char { free_var, at_lower, at_upper };

// Solves G_FF z_F = rhs_F for the free subset; falls back to a tiny ridge
// when the free columns are rank deficient (any least-squares solution is
// acceptable for the projection value).
Vector solve_free(const Matrix& gram, const Vector& rhs,
                  const std::vector<int>& free_idx) {
  const int f = static_cast<int>(free_idx.size());
  Matrix gff(f, f);
  Vector r(f);
  for (int a = 0; a < f; ++a) {
    r(a) = rhs(free_idx[a]);
    for (int b = 0; b < f; ++b) gff(a, b) = gram(free_idx[a], free_idx[b]);
  }
  Eigen::LDLT<Matrix> ldlt(gff);
  Vector z = ldlt.solve(r);
  const double scale = 1.0 + r.cwiseAbs().maxCoeff();
  if (!z.allFinite() || (gff * z - r).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    const double ridge = 1e-12 * (1.0 + gff.diagonal().maxCoeff());
    gff.diagonal().array() += ridge;
    z = Eigen::LDLT<Matrix>(gff).solve(r);
  }
  return z;
}

}  // namespace

void QuadraticProjection::validate() const {
  const int n = static_cast<int>(target.size());
  if (n == 0) throw InvalidInput("projection: empty target");
  if (offset.size() > 0 && offset.size() != n) {
    throw InvalidInput("projection: offset size");
  }
  if (basis.size() > 0 && basis.rows() != n) {
    throw InvalidInput("projection: basis rows");
  }
  const int d = static_cast<int>(basis.cols());
  if (lower.size() > 0 && lower.size() != d) {
    throw InvalidInput("projection: lower size");
  }
  if (upper.size() > 0 && upper.size() != d) {
    throw InvalidInput("projection: upper size");
  }
}

ProjectionResult solve_projection(const QuadraticProjection& qp,
                                  double feas_tol, const Vector* warm_start) {
  qp.validate();
  const int n = static_cast<int>(qp.target.size());
  const int d = static_cast<int>(qp.basis.cols());
  Vector w = qp.target;
  if (qp.offset.size() > 0) w -= qp.offset;

  ProjectionResult res;
  if (d == 0) {
    res.point = qp.offset.size() > 0 ? qp.offset : Vector::Zero(n);
    res.sq_distance = (qp.target - res.point).squaredNorm();
    res.coefficients = Vector(0);
    res.bound_multipliers = Vector(0);
    return res;
  }

  Vector lo = qp.lower.size() > 0 ? qp.lower : Vector::Constant(d, -kInf);
  Vector hi = qp.upper.size() > 0 ? qp.upper : Vector::Constant(d, kInf);
  for (int j = 0; j < d; ++j) {
    if (lo(j) > hi(j)) throw InvalidInput("projection: crossed bounds");
  }

  const Matrix gram = qp.basis.transpose() * qp.basis;
  const Vector bw = qp.basis.transpose() * w;

  Vector z(d);
  std::vector<Part> part(d, Part::free_var);
  if (warm_start && warm_start->size() == d) {
    for (int j = 0; j < d; ++j) {
      double v = std::clamp((*warm_start)(j), lo(j), hi(j));
      z(j) = v;
      if (std::isfinite(lo(j)) && v <= lo(j)) part[j] = Part::at_lower;
      else if (std::isfinite(hi(j)) && v >= hi(j)) part[j] = Part::at_upper;
    }
  } else {
    for (int j = 0; j < d; ++j) {
      const double v = std::clamp(0.0, lo(j), hi(j));
      z(j) = v;
      if (std::isfinite(lo(j)) && v <= lo(j)) part[j] = Part::at_lower;
      else if (std::isfinite(hi(j)) && v >= hi(j)) part[j] = Part::at_upper;
    }
  }

  // Block principal pivoting: exchange every feasibility/optimality
  // violator at once while the violation count improves, with a backoff to
  // Murty's single-exchange rule against cycling.
  const int cap = 60 + 12 * d;
  int best_bad = std::numeric_limits<int>::max();
  int patience = 3;
  Vector grad(d), rhs(d);
  std::vector<int> free_idx;
  for (int iter = 0;; ++iter) {
    if (iter > cap) throw SolverFailure("projection: exchange cap exceeded");
    res.iterations = iter;

    free_idx.clear();
    rhs = bw;
    for (int j = 0; j < d; ++j) {
      if (part[j] == Part::free_var) {
        free_idx.push_back(j);
      } else {
        z(j) = part[j] == Part::at_lower ? lo(j) : hi(j);
        rhs -= gram.col(j) * z(j);
      }
    }
    if (!free_idx.empty()) {
      const Vector zf = solve_free(gram, rhs, free_idx);
      for (std::size_t a = 0; a < free_idx.size(); ++a) z(free_idx[a]) = zf(a);
    }

    grad.noalias() = 2.0 * (gram * z - bw);

    std::vector<int> to_lower, to_upper, to_free;
    const double btol = feas_tol;
    for (int j = 0; j < d; ++j) {
      if (part[j] == Part::free_var) {
        if (z(j) < lo(j) - btol) to_lower.push_back(j);
        else if (z(j) > hi(j) + btol) to_upper.push_back(j);
      } else if (part[j] == Part::at_lower) {
        if (grad(j) < -feas_tol) to_free.push_back(j);
      } else {
        if (grad(j) > feas_tol) to_free.push_back(j);
      }
    }
    const int n_bad = static_cast<int>(to_lower.size() + to_upper.size() +
                                       to_free.size());
    if (n_bad == 0) break;

    if (n_bad < best_bad) {
      best_bad = n_bad;
      patience = 3;
    } else if (patience > 0) {
      --patience;
    } else {
      // Single exchange, largest index first.
      int pick = -1;
      Part dest = Part::free_var;
      for (int j : to_lower) if (j > pick) { pick = j; dest = Part::at_lower; }
      for (int j : to_upper) if (j > pick) { pick = j; dest = Part::at_upper; }
      for (int j : to_free) if (j > pick) { pick = j; dest = Part::free_var; }
      part[pick] = dest;
      continue;
    }
    for (int j : to_lower) part[j] = Part::at_lower;
    for (int j : to_upper) part[j] = Part::at_upper;
    for (int j : to_free) part[j] = Part::free_var;
  }

  for (int j = 0; j < d; ++j) z(j) = std::clamp(z(j), lo(j), hi(j));
  res.coefficients = z;
  res.point = qp.basis * z;
  if (qp.offset.size() > 0) res.point += qp.offset;
  res.sq_distance = (qp.target - res.point).squaredNorm();
  res.bound_multipliers = 2.0 * (gram * z - bw);
  return res;
}

double projection_kkt_residual(const QuadraticProjection& qp,
                               const ProjectionResult& res) {
  const int d = static_cast<int>(qp.basis.cols());
  if (d == 0) return 0.0;
  Vector w = qp.target;
  if (qp.offset.size() > 0) w -= qp.offset;
  const Vector& z = res.coefficients;
  const Vector grad = 2.0 * qp.basis.transpose() * (qp.basis * z - w);
  double r = 0.0;
  for (int j = 0; j < d; ++j) {
    const double lo = qp.lower.size() > 0 ? qp.lower(j) : -kInf;
    const double hi = qp.upper.size() > 0 ? qp.upper(j) : kInf;
    r = std::max(r, lo - z(j));
    r = std::max(r, z(j) - hi);
    const bool at_lo = std::isfinite(lo) && z(j) <= lo + 1e-9;
    const bool at_hi = std::isfinite(hi) && z(j) >= hi - 1e-9;
    if (at_lo && at_hi) continue;
    if (at_lo) r = std::max(r, -grad(j));
    else if (at_hi) r = std::max(r, grad(j));
    else r = std::max(r, std::abs(grad(j)));
  }
  return r;
}

}  // namespace certilab
