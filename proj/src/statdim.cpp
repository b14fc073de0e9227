#include "certilab/statdim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <thread>
#include <vector>

#include "certilab/qp.hpp"
#include "certilab/rng.hpp"

namespace certilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double normal_cdf_upper(double x) {
  return 0.5 * std::erfc(x * 0.70710678118654752440084436);
}

// H(c) = E[(g - c)^2 ; g > c] for g ~ N(0,1); the one building block of
// every interval/half-line kernel.
double gauss_tail_sq(double c) {
  return (1.0 + c * c) * normal_cdf_upper(c) - c * normal_pdf(c);
}

int env_threads() {
  if (const char* s = std::getenv("CERTILAB_THREADS")) {
    const int v = std::atoi(s);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---------------------------------------------------------------------
// Bound-constrained quadratic  min_z z'Gz - 2c'z,  lo <= z <= hi, with the
// Gram matrix fixed across many right-hand sides (one per Monte-Carlo
// sample).  Dense Cholesky on the free set for small problems, sparse for
// the 2D gradient operators.  Same block-pivoting scheme as
// solve_projection, restated here for the cached-Gram layout.
class GramBvls {
 public:
  void init(Matrix gram, Vector lo, Vector hi) {
    d_ = static_cast<int>(gram.cols());
    lo_ = std::move(lo);
    hi_ = std::move(hi);
    dense_ = d_ <= 400;
    if (dense_) {
      gd_ = std::move(gram);
    } else {
      gs_ = gram.sparseView(1e-14, 1.0);
      gs_.makeCompressed();
    }
  }

  int dim() const { return d_; }

  // Warm-startable solve; z carries the previous solution in and the new
  // one out.  Returns the number of exchange iterations.
  int solve(const Vector& c, Vector& z, double tol) const {
    enum class Part : unsigned char { free_var, at_lo, at_hi };
    std::vector<Part> part(d_);
    for (int j = 0; j < d_; ++j) {
      const double v = std::clamp(z(j), lo_(j), hi_(j));
      z(j) = v;
      if (std::isfinite(lo_(j)) && v <= lo_(j)) part[j] = Part::at_lo;
      else if (std::isfinite(hi_(j)) && v >= hi_(j)) part[j] = Part::at_hi;
      else part[j] = Part::free_var;
    }
    const int cap = 60 + 12 * d_;
    int best_bad = std::numeric_limits<int>::max();
    int patience = 3;
    std::vector<int> free_idx;
    Vector grad(d_);
    for (int iter = 0;; ++iter) {
      if (iter > cap) throw SolverFailure("gram bvls: exchange cap");
      free_idx.clear();
      for (int j = 0; j < d_; ++j) {
        if (part[j] == Part::free_var) free_idx.push_back(j);
        else z(j) = part[j] == Part::at_lo ? lo_(j) : hi_(j);
      }
      if (!free_idx.empty()) solve_free(c, part, free_idx, z);
      gram_times(z, grad);
      grad = 2.0 * (grad - c);

      std::vector<int> moves;
      int n_to_lo = 0, n_to_hi = 0, n_to_free = 0;
      std::vector<Part> dest;
      for (int j = 0; j < d_; ++j) {
        if (part[j] == Part::free_var) {
          if (z(j) < lo_(j) - tol) {
            moves.push_back(j);
            dest.push_back(Part::at_lo);
            ++n_to_lo;
          } else if (z(j) > hi_(j) + tol) {
            moves.push_back(j);
            dest.push_back(Part::at_hi);
            ++n_to_hi;
          }
        } else if (part[j] == Part::at_lo) {
          if (grad(j) < -tol) {
            moves.push_back(j);
            dest.push_back(Part::free_var);
            ++n_to_free;
          }
        } else if (grad(j) > tol) {
          moves.push_back(j);
          dest.push_back(Part::free_var);
          ++n_to_free;
        }
      }
      const int n_bad = static_cast<int>(moves.size());
      if (n_bad == 0) return iter;
      if (n_bad < best_bad) {
        best_bad = n_bad;
        patience = 3;
      } else if (patience > 0) {
        --patience;
      } else {
        // Murty fallback: move only the largest-index offender.
        int at = static_cast<int>(moves.size()) - 1;
        part[moves[at]] = dest[at];
        continue;
      }
      for (std::size_t k = 0; k < moves.size(); ++k) part[moves[k]] = dest[k];
    }
  }

  void gram_times(const Vector& z, Vector& out) const {
    if (dense_) out.noalias() = gd_ * z;
    else out.noalias() = gs_ * z;
  }

 private:
  template <typename PartVec>
  void solve_free(const Vector& c, const PartVec& part,
                  const std::vector<int>& free_idx, Vector& z) const {
    const int f = static_cast<int>(free_idx.size());
    // rhs_F = c_F - G_{F,A} z_A; build via the full residual with free
    // entries zeroed.
    Vector za = z;
    for (int j : free_idx) za(j) = 0.0;
    Vector r(d_);
    gram_times(za, r);
    r = c - r;
    if (dense_) {
      Matrix gff(f, f);
      Vector rf(f);
      for (int a = 0; a < f; ++a) {
        rf(a) = r(free_idx[a]);
        for (int b = 0; b < f; ++b) {
          gff(a, b) = gd_(free_idx[a], free_idx[b]);
        }
      }
      Eigen::LDLT<Matrix> ldlt(gff);
      Vector zf = ldlt.solve(rf);
      if (!zf.allFinite()) {
        gff.diagonal().array() += 1e-12 * (1.0 + gff.diagonal().maxCoeff());
        zf = Eigen::LDLT<Matrix>(gff).solve(rf);
      }
      for (int a = 0; a < f; ++a) z(free_idx[a]) = zf(a);
    } else {
      std::vector<int> pos(d_, -1);
      for (int a = 0; a < f; ++a) pos[free_idx[a]] = a;
      std::vector<Eigen::Triplet<double>> trips;
      Vector rf(f);
      for (int a = 0; a < f; ++a) {
        rf(a) = r(free_idx[a]);
        for (SpMatrix::InnerIterator it(gs_, free_idx[a]); it; ++it) {
          const int rp = pos[static_cast<int>(it.row())];
          if (rp >= 0) trips.emplace_back(rp, a, it.value());
        }
      }
      SpMatrix gff(f, f);
      gff.setFromTriplets(trips.begin(), trips.end());
      Eigen::SimplicialLDLT<SpMatrix> ldlt(gff);
      Vector zf;
      if (ldlt.info() == Eigen::Success) {
        zf = ldlt.solve(rf);
      }
      if (ldlt.info() != Eigen::Success || !zf.allFinite()) {
        SpMatrix reg = gff;
        for (int a = 0; a < f; ++a) reg.coeffRef(a, a) += 1e-10;
        Eigen::SimplicialLDLT<SpMatrix> ldlt2(reg);
        zf = ldlt2.solve(rf);
      }
      for (int a = 0; a < f; ++a) z(free_idx[a]) = zf(a);
    }
    (void)part;
  }

  int d_ = 0;
  bool dense_ = true;
  Matrix gd_;
  SpMatrix gs_;
  Vector lo_, hi_;
};

// Per-coordinate cross-section of tau * df(x) for D = I: an interval
// [tau*L_i, tau*U_i] with L/U possibly infinite.
struct SeparableSection {
  Vector lo, hi;  // at tau = 1
};

SeparableSection separable_sections(const SubdiffDescription& sd, int n) {
  SeparableSection s;
  s.lo = sd.fixed;
  s.hi = sd.fixed;
  for (int k = 0; k < sd.bounded_t.cols(); ++k) {
    const int j = sd.sets.cosupport[k];
    s.lo(j) -= 1.0;
    s.hi(j) += 1.0;
  }
  for (int k = 0; k < sd.num_rays(); ++k) {
    if (sd.ray_sign[k] < 0.0) s.lo(sd.ray_index[k]) = -kInf;
    else s.hi(sd.ray_index[k]) = kInf;
  }
  (void)n;
  return s;
}

double separable_dist_sq(const SeparableSection& s, const Vector& x,
                         double tau) {
  double total = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double lo = tau * s.lo(i);
    const double hi = tau * s.hi(i);
    if (x(i) > hi) total += (x(i) - hi) * (x(i) - hi);
    else if (x(i) < lo) total += (lo - x(i)) * (lo - x(i));
  }
  return total;
}

// Monte-Carlo evaluator with common random numbers: one fixed sample
// matrix, per-sample warm-start caches for the QP path.
class JEstimator {
 public:
  JEstimator(const ObjectiveSpec& spec, const Vector& x_bar, int k,
             std::uint64_t seed, double qp_tol, int threads)
      : n_(spec.n), k_(k), qp_tol_(qp_tol), threads_(threads) {
    sd_ = subdiff_description(spec, x_bar);
    samples_.resize(n_, k_);
    Rng rng(seed);
    for (int i = 0; i < k_; ++i) {
      for (int r = 0; r < n_; ++r) samples_(r, i) = rng.normal();
    }
    if (sd_.separable) {
      sections_ = separable_sections(sd_, n_);
      return;
    }
    const int nl = static_cast<int>(sd_.bounded_t.cols());
    const int nr = sd_.num_rays();
    d_ = nl + nr;
    Matrix basis(n_, d_);
    if (nl > 0) basis.leftCols(nl) = sd_.bounded_t;
    if (nr > 0) basis.rightCols(nr) = sd_.ray_columns(n_);
    Vector lo = Vector::Constant(d_, -1.0);
    Vector hi = Vector::Constant(d_, 1.0);
    for (int j = nl; j < d_; ++j) {
      lo(j) = 0.0;
      hi(j) = kInf;
    }
    solver_.init(basis.transpose() * basis, std::move(lo), std::move(hi));
    bx_ = basis.transpose() * samples_;           // d x k
    bfix_ = basis.transpose() * sd_.fixed;        // d
    fixfix_ = sd_.fixed.squaredNorm();
    xfix_ = samples_.transpose() * sd_.fixed;     // k
    xsq_.resize(k_);
    for (int i = 0; i < k_; ++i) xsq_(i) = samples_.col(i).squaredNorm();
    warm_ = Matrix::Zero(d_, k_);
  }

  int sample_count() const { return k_; }
  const SubdiffDescription& description() const { return sd_; }

  // h_k(tau) with per-sample values exposed for the stderr computation.
  double evaluate(double tau, Vector* per_sample = nullptr) {
    Vector vals(k_);
    if (tau == 0.0) {
      if (sd_.separable) {
        for (int i = 0; i < k_; ++i) vals(i) = samples_.col(i).squaredNorm();
      } else {
        vals = xsq_;
      }
    } else if (sd_.separable) {
      for (int i = 0; i < k_; ++i) {
        vals(i) = separable_dist_sq(sections_, samples_.col(i), tau);
      }
    } else {
      const int workers =
          std::max(1, std::min(threads_ > 0 ? threads_ : env_threads(), k_));
      auto run = [&](int begin, int end) {
        Vector z(d_), c(d_), gz(d_);
        for (int i = begin; i < end; ++i) {
          z = warm_.col(i);
          c = bx_.col(i) / tau - bfix_;
          solver_.solve(c, z, qp_tol_);
          warm_.col(i) = z;
          solver_.gram_times(z, gz);
          // ||X - tau(y0 + Bz)||^2 assembled from cached inner products.
          const double v = xsq_(i) - 2.0 * tau * (xfix_(i) + bx_.col(i).dot(z)) +
                           tau * tau * (fixfix_ + 2.0 * bfix_.dot(z) +
                                        z.dot(gz));
          vals(i) = std::max(v, 0.0);
        }
      };
      if (workers <= 1) {
        run(0, k_);
      } else {
        std::vector<std::thread> pool;
        const int chunk = (k_ + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
          const int b = w * chunk;
          const int e = std::min(k_, b + chunk);
          if (b < e) pool.emplace_back(run, b, e);
        }
        for (auto& t : pool) t.join();
      }
    }
    if (per_sample) *per_sample = vals;
    // Fixed-order reduction keeps results identical across thread counts.
    double sum = 0.0;
    for (int i = 0; i < k_; ++i) sum += vals(i);
    return sum / k_;
  }

  std::pair<double, double> evaluate_with_stderr(double tau) {
    Vector vals;
    const double mean = evaluate(tau, &vals);
    double ss = 0.0;
    for (int i = 0; i < k_; ++i) {
      ss += (vals(i) - mean) * (vals(i) - mean);
    }
    const double sd = k_ > 1 ? std::sqrt(ss / (k_ - 1)) : 0.0;
    return {mean, sd / std::sqrt(double(k_))};
  }

 private:
  int n_, k_, d_ = 0;
  double qp_tol_;
  int threads_;
  SubdiffDescription sd_;
  Matrix samples_;
  SeparableSection sections_;
  GramBvls solver_;
  Matrix bx_, warm_;
  Vector bfix_, xfix_, xsq_;
  double fixfix_ = 0.0;
};

}  // namespace

double kernel_point(double a, double tau) {
  return 1.0 + (tau * a) * (tau * a);
}

double kernel_interval(double tau) { return 2.0 * gauss_tail_sq(tau); }

double kernel_halfline_below(double tau) { return gauss_tail_sq(tau); }

double kernel_halfline_above(double tau) { return gauss_tail_sq(-tau); }

double j_closed_form(ObjectiveCase f, int n, int s, double tau) {
  if (n < 1 || s < 0 || s > n) throw InvalidInput("j_closed_form: counts");
  switch (f) {
    case ObjectiveCase::F1:
      return s * kernel_point(1.0, tau) + (n - s) * kernel_interval(tau);
    case ObjectiveCase::F2:
      return s * kernel_point(1.0, tau) + (n - s) * kernel_halfline_below(tau);
    case ObjectiveCase::F3:
      return j_closed_form_f3(n - s, s, 0, tau);
    default:
      throw InvalidInput("j_closed_form: only F1-F3 have closed forms");
  }
}

double j_closed_form_f3(int at_lower, int at_upper, int interior, double tau) {
  return at_lower * kernel_halfline_below(tau) +
         at_upper * kernel_halfline_above(tau) +
         interior * kernel_point(1.0, tau);
}

double dist_sq_to_scaled_subdiff(const Vector& x, double tau,
                                 const SubdiffDescription& sd, double qp_tol) {
  if (tau < 0.0) throw InvalidInput("dist_sq: tau must be >= 0");
  if (tau == 0.0) return x.squaredNorm();
  const int n = static_cast<int>(x.size());
  if (sd.separable) {
    return separable_dist_sq(separable_sections(sd, n), x, tau);
  }
  const int nl = static_cast<int>(sd.bounded_t.cols());
  const int nr = sd.num_rays();
  QuadraticProjection qp;
  qp.target = x;
  qp.offset = tau * sd.fixed;
  qp.basis.resize(n, nl + nr);
  if (nl > 0) qp.basis.leftCols(nl) = tau * sd.bounded_t;
  if (nr > 0) qp.basis.rightCols(nr) = tau * sd.ray_columns(n);
  qp.lower = Vector::Constant(nl + nr, -1.0);
  qp.upper = Vector::Constant(nl + nr, 1.0);
  for (int j = nl; j < nl + nr; ++j) {
    qp.lower(j) = 0.0;
    qp.upper(j) = kInf;
  }
  return solve_projection(qp, qp_tol).sq_distance;
}

std::pair<double, double> j_approx(const ObjectiveSpec& spec,
                                   const Vector& x_bar, double tau, int k,
                                   std::uint64_t seed) {
  if (k < 1) throw InvalidInput("j_approx: need k >= 1");
  JEstimator est(spec, x_bar, k, seed, 1e-6, 0);
  return est.evaluate_with_stderr(tau);
}

StatDimEstimate minimize_j(const ObjectiveSpec& spec, const Vector& x_bar,
                           const StatDimOptions& opts) {
  spec.validate();
  const double norm_x = x_bar.norm();
  const double tol_tau = opts.tol_tau > 0.0
                             ? opts.tol_tau
                             : 1e-3 * std::max(norm_x, 1e-6);

  StatDimEstimate est;
  const bool closed = spec.identity_analysis && !opts.force_monte_carlo;

  const SubdiffDescription sd = subdiff_description(spec, x_bar);
  const double min_norm_sq = dist_sq_to_scaled_subdiff(
      Vector::Zero(spec.n), 1.0, sd, std::min(opts.qp_tol, 1e-8));
  est.best_effort = min_norm_sq <= 1e-10;

  JEstimator* mc = nullptr;
  std::unique_ptr<JEstimator> mc_owner;
  const IndexSets sets = sd.sets;
  const int s_count = static_cast<int>(sets.support.size());
  auto h = [&](double tau) -> double {
    if (closed) {
      if (spec.f == ObjectiveCase::F3) {
        return j_closed_form_f3(static_cast<int>(sets.active_lower.size()),
                                static_cast<int>(sets.active_upper.size()),
                                static_cast<int>(sets.inactive.size()), tau);
      }
      return j_closed_form(spec.f, spec.n, s_count, tau);
    }
    return mc->evaluate(tau);
  };
  if (!closed) {
    mc_owner = std::make_unique<JEstimator>(spec, x_bar, opts.samples,
                                            opts.seed, opts.qp_tol,
                                            opts.threads);
    mc = mc_owner.get();
  }

  // Search interval: [0, 2||x||/b] when the subdifferential is bounded
  // away from 0 and has no rays (F1/F4 situation); otherwise geometric
  // growth until the convex h increases, which brackets the minimum.
  double hi;
  const bool bounded_subdiff = sd.num_rays() == 0;
  if (bounded_subdiff && !est.best_effort) {
    hi = 2.0 * norm_x / std::sqrt(min_norm_sq);
  } else {
    hi = 1.0;
    double prev = h(0.5);
    int growth = 0;
    const int growth_cap = est.best_effort ? 24 : 60;
    while (true) {
      const double cur = h(hi);
      if (cur > prev) break;
      prev = cur;
      hi *= 2.0;
      if (++growth > growth_cap) {
        if (est.best_effort) break;  // flagged, no guarantee claimed
        throw SolverFailure("minimize_j: could not bracket the minimum");
      }
    }
  }

  double lo = 0.0;
  est.search_lo = lo;
  est.search_hi = hi;
  // Bisection on the sign of a central finite-difference derivative; with
  // common random numbers h is convex, so the sign test is sound.
  while (hi - lo > tol_tau) {
    const double mid = 0.5 * (lo + hi);
    const double delta =
        std::max(std::min(tol_tau * 0.25, (hi - lo) * 1e-3), mid * 1e-9);
    const double g = (h(mid + delta) - h(mid - delta)) / (2.0 * delta);
    if (g > 0.0) hi = mid;
    else lo = mid;
  }
  est.tau_star = 0.5 * (lo + hi);
  if (closed) {
    est.method = StatDimMethod::closed_form;
    est.samples = 0;
    est.j_star = h(est.tau_star);
    est.stderr_value = 0.0;
  } else {
    est.method = StatDimMethod::monte_carlo;
    est.samples = opts.samples;
    const auto [val, se] = mc->evaluate_with_stderr(est.tau_star);
    est.j_star = val;
    est.stderr_value = se;
  }
  return est;
}

}  // namespace certilab
