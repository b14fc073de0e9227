#include "certilab/signals.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "certilab/linalg.hpp"
#include "certilab/rng.hpp"

namespace certilab {

namespace {

// Count of entries with magnitude above tol.
int nnz_above(const Vector& v, double tol) {
  int c = 0;
  for (int i = 0; i < v.size(); ++i) c += std::abs(v(i)) > tol ? 1 : 0;
  return c;
}

std::vector<int> sample_subset(Rng& rng, int universe, int k) {
  std::vector<int> pool(universe);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(universe - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> complement_of(const std::vector<int>& idx, int universe) {
  std::vector<int> out;
  std::size_t at = 0;
  for (int i = 0; i < universe; ++i) {
    if (at < idx.size() && idx[at] == i) {
      ++at;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<int> cosupport_of(const Vector& v, double tol) {
  std::vector<int> out;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) <= tol) out.push_back(i);
  }
  return out;
}

}  // namespace

ValueClass value_class_by_name(const std::string& s) {
  if (s == "real") return ValueClass::real;
  if (s == "nonnegative" || s == "nonneg") return ValueClass::nonnegative;
  if (s == "binary") return ValueClass::binary;
  throw InvalidInput("unknown value class '" + s + "'");
}

SignalStructure structure_by_name(const std::string& s) {
  if (s == "sparse") return SignalStructure::sparse;
  if (s == "gradient-sparse-1d" || s == "grad1d") {
    return SignalStructure::gradient_sparse_1d;
  }
  if (s == "gradient-sparse-2d" || s == "grad2d") {
    return SignalStructure::gradient_sparse_2d;
  }
  throw InvalidInput("unknown signal structure '" + s + "'");
}

void SignalSpec::validate() const {
  if (n < 2) throw InvalidInput("signal: need n >= 2");
  if (!(rho > 0.0 && rho < 1.0)) {
    throw InvalidInput("signal: relative sparsity must lie in (0,1)");
  }
  const int p = structure == SignalStructure::sparse ? n
                : structure == SignalStructure::gradient_sparse_1d
                    ? n - 1
                    : 2 * n * (n - 1);
  if (std::lround(rho * p) < 1) {
    throw InvalidInput("signal: rho too small for this dimension");
  }
}

Vector gen_sparse_1d(const SignalSpec& spec) {
  spec.validate();
  if (spec.structure != SignalStructure::sparse) {
    throw InvalidInput("gen_sparse_1d: wrong structure");
  }
  const int k = static_cast<int>(std::lround(spec.rho * spec.n));
  Rng rng(spec.seed);
  const auto support = sample_subset(rng, spec.n, k);
  Vector x = Vector::Zero(spec.n);
  for (int i : support) {
    switch (spec.value_class) {
      case ValueClass::real: {
        double v = rng.normal();
        while (v == 0.0) v = rng.normal();
        x(i) = v;
        break;
      }
      case ValueClass::nonnegative: {
        double v = std::abs(rng.normal());
        while (v == 0.0) v = std::abs(rng.normal());
        x(i) = v;
        break;
      }
      case ValueClass::binary:
        x(i) = 1.0;
        break;
    }
  }
  return x;
}

std::optional<Vector> gen_cosupport_projection(const Matrix& d,
                                               const std::vector<int>& lambda,
                                               std::uint64_t seed) {
  const int n = static_cast<int>(d.cols());
  Rng rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) {
    double g = rng.normal();
    while (g == 0.0) g = rng.normal();
    v(i) = g;
  }
  if (lambda.empty()) return v;
  Matrix dl(static_cast<Eigen::Index>(lambda.size()), n);
  for (std::size_t k = 0; k < lambda.size(); ++k) dl.row(k) = d.row(lambda[k]);
  if (rank_of(dl) < static_cast<int>(lambda.size())) return std::nullopt;
  // x = v - D_L' (D_L D_L')^{-1} D_L v.
  const Matrix gram = dl * dl.transpose();
  const Vector rhs = dl * v;
  const Vector w = Eigen::LLT<Matrix>(gram).solve(rhs);
  return Vector(v - dl.transpose() * w);
}

Vector binary_from_cosupport(const std::vector<int>& lambda, int n) {
  if (n < 1) throw InvalidInput("binary_from_cosupport: need n >= 1");
  std::vector<bool> copy_edge(n - 1, false);
  for (int i : lambda) {
    if (i < 0 || i >= n - 1) {
      throw InvalidInput("binary_from_cosupport: index outside [n-1]");
    }
    copy_edge[i] = true;
  }
  Vector x(n);
  x(0) = 1.0;
  for (int i = 0; i + 1 < n; ++i) {
    x(i + 1) = copy_edge[i] ? x(i) : 1.0 - x(i);
  }
  return x;
}

Vector gen_gradient_sparse_1d(const SignalSpec& spec) {
  spec.validate();
  if (spec.structure != SignalStructure::gradient_sparse_1d) {
    throw InvalidInput("gen_gradient_sparse_1d: wrong structure");
  }
  const int n = spec.n;
  const int p = n - 1;
  const int jumps = static_cast<int>(std::lround(spec.rho * p));
  Rng rng(spec.seed);
  const Matrix d = diff_operator_1d(n);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto jump_set = sample_subset(rng, p, jumps);
    const auto lambda = complement_of(jump_set, p);
    if (spec.value_class == ValueClass::binary) {
      return binary_from_cosupport(lambda, n);
    }
    const auto x_opt = gen_cosupport_projection(d, lambda, rng.next_u64());
    if (!x_opt) continue;  // resample Lambda
    Vector x = *x_opt;
    if (spec.value_class == ValueClass::nonnegative) {
      x = x.cwiseAbs();
    }
    // |.| (and the projection itself, on a null set) can move the
    // cosupport; regenerate until it is hit exactly.
    if (cosupport_of(d * x, 1e-9) == lambda) return x;
  }
  throw SolverFailure("gen_gradient_sparse_1d: could not match cosupport");
}

namespace {

int gradient_nnz_2d(const Vector& img, int side, double tol) {
  int c = 0;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i + 1 < side; ++i) {
      if (std::abs(img(j * side + i + 1) - img(j * side + i)) > tol) ++c;
    }
  }
  for (int j = 0; j + 1 < side; ++j) {
    for (int i = 0; i < side; ++i) {
      if (std::abs(img((j + 1) * side + i) - img(j * side + i)) > tol) ++c;
    }
  }
  return c;
}

void xor_rectangle(Vector& img, int side, int r0, int c0, int h, int w) {
  for (int j = c0; j < c0 + w; ++j) {
    for (int i = r0; i < r0 + h; ++i) {
      double& px = img(j * side + i);
      px = px == 0.0 ? 1.0 : 0.0;
    }
  }
}

std::vector<int> label_components(const Vector& img, int side) {
  const int n = side * side;
  std::vector<int> label(n, -1);
  std::vector<int> stack;
  int next = 0;
  for (int start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    label[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const int at = stack.back();
      stack.pop_back();
      const int i = at % side, j = at / side;
      const int nbrs[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& nb : nbrs) {
        if (nb[0] < 0 || nb[0] >= side || nb[1] < 0 || nb[1] >= side) continue;
        const int idx = nb[1] * side + nb[0];
        if (label[idx] < 0 && img(idx) == img(at)) {
          label[idx] = next;
          stack.push_back(idx);
        }
      }
    }
    ++next;
  }
  return label;
}

}  // namespace

GeneratedSignal gen_gradient_sparse_2d(const SignalSpec& spec) {
  spec.validate();
  if (spec.structure != SignalStructure::gradient_sparse_2d) {
    throw InvalidInput("gen_gradient_sparse_2d: wrong structure");
  }
  const int side = spec.n;
  const int n = side * side;
  const int p = 2 * side * (side - 1);
  Rng rng(spec.seed);

  Vector img = Vector::Zero(n);
  double err = spec.rho;  // |achieved - target| at the all-zero start
  const int max_steps = 10 * side;
  for (int step = 0; step < max_steps && err > 0.02; ++step) {
    const int r0 = static_cast<int>(rng.below(side));
    const int c0 = static_cast<int>(rng.below(side));
    const int h = 1 + static_cast<int>(rng.below(side - r0));
    const int w = 1 + static_cast<int>(rng.below(side - c0));
    xor_rectangle(img, side, r0, c0, h, w);
    const double cand =
        std::abs(double(gradient_nnz_2d(img, side, 1e-12)) / p - spec.rho);
    if (cand < err) {
      err = cand;
    } else {
      xor_rectangle(img, side, r0, c0, h, w);  // revert (xor is involutive)
    }
  }

  GeneratedSignal out;
  out.rho_warning = err > 0.02;
  if (spec.value_class == ValueClass::binary) {
    out.x = img;
    return out;
  }
  // Relabel connected components with distinct random values; boundaries
  // (and hence the gradient support) stay exactly where they are.
  const auto label = label_components(img, side);
  const int ncomp = 1 + *std::max_element(label.begin(), label.end());
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<double> value(ncomp);
    for (int c = 0; c < ncomp; ++c) {
      double v = rng.normal();
      if (spec.value_class == ValueClass::nonnegative) v = std::abs(v);
      value[c] = v;
    }
    Vector relabeled(n);
    for (int i = 0; i < n; ++i) relabeled(i) = value[label[i]];
    if (gradient_nnz_2d(relabeled, side, 1e-9) ==
        gradient_nnz_2d(img, side, 1e-12)) {
      out.x = relabeled;
      return out;
    }
  }
  throw SolverFailure("gen_gradient_sparse_2d: relabeling kept colliding");
}

GeneratedSignal generate_signal(const SignalSpec& spec) {
  GeneratedSignal out;
  switch (spec.structure) {
    case SignalStructure::sparse:
      out.x = gen_sparse_1d(spec);
      return out;
    case SignalStructure::gradient_sparse_1d:
      out.x = gen_gradient_sparse_1d(spec);
      return out;
    case SignalStructure::gradient_sparse_2d:
      return gen_gradient_sparse_2d(spec);
  }
  throw InvalidInput("generate_signal: bad structure");
}

double achieved_relative_sparsity(const SignalSpec& spec, const Vector& x,
                                  double act_tol) {
  switch (spec.structure) {
    case SignalStructure::sparse:
      return double(nnz_above(x, act_tol)) / spec.n;
    case SignalStructure::gradient_sparse_1d: {
      const Vector dx = diff_operator_1d(spec.n) * x;
      return double(nnz_above(dx, act_tol)) / (spec.n - 1);
    }
    case SignalStructure::gradient_sparse_2d: {
      const int p = 2 * spec.n * (spec.n - 1);
      return double(gradient_nnz_2d(x, spec.n, act_tol)) / p;
    }
  }
  throw InvalidInput("achieved_relative_sparsity: bad structure");
}

Vector apply_circle_mask(const Vector& image, int side) {
  if (image.size() != side * side) {
    throw InvalidInput("apply_circle_mask: not a square image");
  }
  Vector out = image;
  const double c = side / 2.0;
  const double r2 = c * c;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const double dx = (j + 0.5) - c;
      const double dy = (i + 0.5) - c;
      if (dx * dx + dy * dy > r2) out(j * side + i) = 0.0;
    }
  }
  return out;
}

}  // namespace certilab
