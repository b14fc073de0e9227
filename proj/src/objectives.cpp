#include "certilab/objectives.hpp"

#include <cmath>
#include <limits>

#include "certilab/linalg.hpp"
#include "certilab/lp.hpp"

namespace certilab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double sign_of(double v) { return v > 0.0 ? 1.0 : -1.0; }
}  // namespace

Vector ObjectiveSpec::analysis_t_times(const std::vector<int>& rows,
                                       const Vector& w) const {
  Vector out = Vector::Zero(n);
  if (identity_analysis) {
    for (std::size_t k = 0; k < rows.size(); ++k) out(rows[k]) = w(k);
  } else {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out += analysis.row(rows[k]).transpose() * w(k);
    }
  }
  return out;
}

Matrix ObjectiveSpec::dense_analysis() const {
  return identity_analysis ? Matrix(Matrix::Identity(n, n)) : analysis;
}

bool ObjectiveSpec::in_box(const Vector& x, double tol) const {
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lower(i)) && x(i) < lower(i) - tol) return false;
    if (std::isfinite(upper(i)) && x(i) > upper(i) + tol) return false;
  }
  return true;
}

void ObjectiveSpec::validate() const {
  if (n <= 0) throw InvalidInput("objective: empty dimension");
  if (lower.size() != n || upper.size() != n) {
    throw InvalidInput("objective: bound sizes");
  }
  for (int i = 0; i < n; ++i) {
    if (!(lower(i) < upper(i))) throw InvalidInput("objective: need l < u");
  }
  if (!identity_analysis && analysis.cols() != n) {
    throw InvalidInput("objective: analysis column count");
  }
}

namespace {

void set_case_bounds(ObjectiveSpec& spec) {
  switch (spec.f) {
    case ObjectiveCase::F1:
    case ObjectiveCase::F4:
      spec.lower = Vector::Constant(spec.n, -kInf);
      spec.upper = Vector::Constant(spec.n, kInf);
      break;
    case ObjectiveCase::F2:
    case ObjectiveCase::F5:
      spec.lower = Vector::Zero(spec.n);
      spec.upper = Vector::Constant(spec.n, kInf);
      break;
    case ObjectiveCase::F3:
    case ObjectiveCase::F6:
      spec.lower = Vector::Zero(spec.n);
      spec.upper = Vector::Ones(spec.n);
      break;
  }
}

}  // namespace

ObjectiveSpec make_objective(ObjectiveCase f, int n) {
  if (!has_identity_analysis(f)) {
    throw InvalidInput("make_objective: F4-F6 need an analysis matrix");
  }
  ObjectiveSpec spec;
  spec.f = f;
  spec.n = n;
  spec.identity_analysis = true;
  set_case_bounds(spec);
  spec.validate();
  return spec;
}

ObjectiveSpec make_objective(ObjectiveCase f, Matrix analysis) {
  if (has_identity_analysis(f)) {
    throw InvalidInput("make_objective: F1-F3 use the identity analysis");
  }
  ObjectiveSpec spec;
  spec.f = f;
  spec.n = static_cast<int>(analysis.cols());
  spec.analysis = std::move(analysis);
  spec.identity_analysis = false;
  set_case_bounds(spec);
  spec.validate();
  return spec;
}

ObjectiveSpec make_objective_by_name(const std::string& name, int n) {
  if (name == "f1") return make_objective(ObjectiveCase::F1, n);
  if (name == "f2") return make_objective(ObjectiveCase::F2, n);
  if (name == "f3") return make_objective(ObjectiveCase::F3, n);
  ObjectiveCase f;
  if (name.rfind("f4", 0) == 0) f = ObjectiveCase::F4;
  else if (name.rfind("f5", 0) == 0) f = ObjectiveCase::F5;
  else if (name.rfind("f6", 0) == 0) f = ObjectiveCase::F6;
  else throw InvalidInput("unknown objective case '" + name + "'");
  const std::string suffix = name.substr(2);
  if (suffix == "-1d") return make_objective(f, diff_operator_1d(n));
  if (suffix == "-2d") {
    const int side = static_cast<int>(std::lround(std::sqrt(double(n))));
    if (side * side != n) {
      throw InvalidInput("2d objective needs a square signal length");
    }
    return make_objective(f, gradient_operator_2d(side, side));
  }
  throw InvalidInput("unknown objective case '" + name + "'");
}

std::string objective_case_name(ObjectiveCase f) {
  switch (f) {
    case ObjectiveCase::F1: return "f1";
    case ObjectiveCase::F2: return "f2";
    case ObjectiveCase::F3: return "f3";
    case ObjectiveCase::F4: return "f4";
    case ObjectiveCase::F5: return "f5";
    case ObjectiveCase::F6: return "f6";
  }
  return "?";
}

IndexSets index_sets(const ObjectiveSpec& spec, const Vector& x,
                     double act_tol) {
  spec.validate();
  if (x.size() != spec.n) throw InvalidInput("index_sets: signal length");
  if (!spec.in_box(x, act_tol)) {
    throw InfeasibleError("index_sets: point violates the box bounds");
  }
  IndexSets sets;
  for (int i = 0; i < spec.n; ++i) {
    if (std::abs(x(i)) > act_tol) sets.support.push_back(i);
    const bool lo = std::isfinite(spec.lower(i)) &&
                    std::abs(x(i) - spec.lower(i)) <= act_tol;
    const bool hi = std::isfinite(spec.upper(i)) &&
                    std::abs(x(i) - spec.upper(i)) <= act_tol;
    if (lo) sets.active_lower.push_back(i);
    else if (hi) sets.active_upper.push_back(i);
    else sets.inactive.push_back(i);
  }
  const Vector dx = spec.apply_analysis(x);
  for (int j = 0; j < spec.p(); ++j) {
    if (std::abs(dx(j)) <= act_tol) sets.cosupport.push_back(j);
    else sets.cosupport_c.push_back(j);
  }
  return sets;
}

Matrix psi_matrix(const ObjectiveSpec& spec, const IndexSets& sets) {
  Matrix psi = Matrix::Zero(spec.n, spec.n);
  for (int i : sets.active_lower) psi(i, i) = -1.0;
  for (int i : sets.active_upper) psi(i, i) = 1.0;
  return psi;
}

Matrix SubdiffDescription::ray_columns(int n) const {
  Matrix r = Matrix::Zero(n, num_rays());
  for (int k = 0; k < num_rays(); ++k) r(ray_index[k], k) = ray_sign[k];
  return r;
}

SubdiffDescription subdiff_description(const ObjectiveSpec& spec,
                                       const Vector& x, double act_tol) {
  SubdiffDescription sd;
  sd.separable = spec.identity_analysis;
  sd.sets = index_sets(spec, x, act_tol);
  const Vector dx = spec.apply_analysis(x);
  sd.fixed = Vector::Zero(spec.n);
  for (int j : sd.sets.cosupport_c) {
    const double s = sign_of(dx(j));
    if (spec.identity_analysis) {
      sd.fixed(j) += s;
    } else {
      sd.fixed += spec.analysis.row(j).transpose() * s;
    }
  }
  const int nl = static_cast<int>(sd.sets.cosupport.size());
  sd.bounded_t.resize(spec.n, nl);
  for (int k = 0; k < nl; ++k) {
    const int j = sd.sets.cosupport[k];
    if (spec.identity_analysis) {
      sd.bounded_t.col(k) = Vector::Unit(spec.n, j);
    } else {
      sd.bounded_t.col(k) = spec.analysis.row(j).transpose();
    }
  }
  for (int i : sd.sets.active_lower) {
    sd.ray_index.push_back(i);
    sd.ray_sign.push_back(-1.0);
  }
  for (int i : sd.sets.active_upper) {
    sd.ray_index.push_back(i);
    sd.ray_sign.push_back(1.0);
  }
  return sd;
}

double objective_value(const ObjectiveSpec& spec, const Vector& x,
                       double act_tol) {
  if (!spec.in_box(x, act_tol)) return kInf;
  return spec.apply_analysis(x).lpNorm<1>();
}

double directional_derivative(const ObjectiveSpec& spec, const Vector& x,
                              const Vector& d, const IndexSets& sets) {
  const double dir_tol = 1e-12;
  for (int i : sets.active_lower) {
    if (d(i) < -dir_tol) return kInf;
  }
  for (int i : sets.active_upper) {
    if (d(i) > dir_tol) return kInf;
  }
  const Vector dx = spec.apply_analysis(x);
  const Vector dd = spec.apply_analysis(d);
  double val = 0.0;
  for (int j : sets.cosupport_c) val += sign_of(dx(j)) * dd(j);
  for (int j : sets.cosupport) val += std::abs(dd(j));
  return val;
}

bool subdiff_contains(const ObjectiveSpec& spec, const Vector& x,
                      const Vector& v, double tol) {
  const SubdiffDescription sd = subdiff_description(spec, x);
  const int nl = static_cast<int>(sd.bounded_t.cols());
  const int nr = sd.num_rays();
  const int n = spec.n;
  // min sum(r+ + r-)  s.t.  bounded*alpha + rays*mu + r+ - r- = v - fixed.
  LinearProgram lp;
  const int nv = nl + nr + 2 * n;
  lp.objective = Vector::Zero(nv);
  lp.objective.tail(2 * n).setOnes();
  lp.eq_lhs.resize(n, nv);
  lp.eq_lhs.setZero();
  if (nl > 0) lp.eq_lhs.leftCols(nl) = sd.bounded_t;
  if (nr > 0) lp.eq_lhs.middleCols(nl, nr) = sd.ray_columns(n);
  lp.eq_lhs.middleCols(nl + nr, n) = Matrix::Identity(n, n);
  lp.eq_lhs.rightCols(n) = -Matrix::Identity(n, n);
  lp.eq_rhs = v - sd.fixed;
  lp.var_lower = Vector::Constant(nv, -kInf);
  lp.var_upper = Vector::Constant(nv, kInf);
  for (int k = 0; k < nl; ++k) {
    lp.var_lower(k) = -1.0;
    lp.var_upper(k) = 1.0;
  }
  for (int k = nl; k < nv; ++k) lp.var_lower(k) = 0.0;
  const LpSolution sol = solve_lp(lp, 1e-9);
  return sol.status == LpStatus::optimal && sol.objective_value <= tol;
}

}  // namespace certilab
