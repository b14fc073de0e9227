#include "certilab/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "certilab/rng.hpp"

namespace certilab {

namespace {

// Entries below this are treated as "no intersection" when binarizing;
// keeps corner-grazing rays out of the support.
constexpr double kHitTol = 1e-9;

struct Segment {
  double s0, s1;
  bool hit;
};

// Clip the line P(s) = origin + s*dir against [0,N]^2 (Liang-Barsky).
Segment clip_to_square(double ox, double oy, double dx, double dy, double n) {
  double s0 = -1e300, s1 = 1e300;
  const double o[2] = {ox, oy};
  const double d[2] = {dx, dy};
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-14) {
      if (o[axis] < 0.0 || o[axis] > n) return {0, 0, false};
      continue;
    }
    double a = (0.0 - o[axis]) / d[axis];
    double b = (n - o[axis]) / d[axis];
    if (a > b) std::swap(a, b);
    s0 = std::max(s0, a);
    s1 = std::min(s1, b);
  }
  if (s1 <= s0) return {0, 0, false};
  return {s0, s1, true};
}

}  // namespace

TomoVariant tomo_variant_by_name(const std::string& s) {
  if (s == "binary") return TomoVariant::binary;
  if (s == "perturbed") return TomoVariant::perturbed;
  if (s == "real") return TomoVariant::real;
  throw InvalidInput("unknown tomo variant '" + s + "'");
}

int TomoGeometry::effective_rays() const {
  if (rays_per_angle > 0) return rays_per_angle;
  return static_cast<int>(std::lround(std::sqrt(2.0) * side));
}

void TomoGeometry::validate() const {
  if (side < 2) throw InvalidInput("tomo: need N >= 2");
  if (num_angles < 1) throw InvalidInput("tomo: need at least one angle");
}

Matrix gaussian_matrix(int m, int n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw InvalidInput("gaussian_matrix: empty shape");
  Rng rng(seed);
  Matrix a(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  }
  return a;
}

Matrix tomo_matrix(const TomoGeometry& geom, TomoVariant variant,
                   double perturb_scale, std::uint64_t seed) {
  geom.validate();
  const int nn = geom.side;
  const int n = nn * nn;
  const int p = geom.effective_rays();
  const double width = std::sqrt(2.0) * nn;  // circumscribed width
  const double spacing = width / p;
  const double c = nn / 2.0;

  Matrix a = Matrix::Zero(geom.num_angles * p, n);
  std::vector<double> crossings;
  for (int ai = 0; ai < geom.num_angles; ++ai) {
    const double theta = ai * M_PI / geom.num_angles;
    // Rays travel along (cos t, sin t) and are offset along the rotated
    // axis (-sin t, cos t); angle 0 gives horizontal rays.
    const double dx = std::cos(theta), dy = std::sin(theta);
    const double wx = -std::sin(theta), wy = std::cos(theta);
    for (int ri = 0; ri < p; ++ri) {
      const double t = (ri + 0.5 - p / 2.0) * spacing;
      const double ox = c + t * wx, oy = c + t * wy;
      const Segment seg = clip_to_square(ox, oy, dx, dy, nn);
      if (!seg.hit) continue;
      // Siddon traversal: collect the parametric grid-line crossings and
      // assign each segment to the pixel holding its midpoint.
      crossings.clear();
      crossings.push_back(seg.s0);
      crossings.push_back(seg.s1);
      if (std::abs(dx) > 1e-14) {
        for (int k = 0; k <= nn; ++k) {
          const double s = (k - ox) / dx;
          if (s > seg.s0 + 1e-12 && s < seg.s1 - 1e-12) crossings.push_back(s);
        }
      }
      if (std::abs(dy) > 1e-14) {
        for (int k = 0; k <= nn; ++k) {
          const double s = (k - oy) / dy;
          if (s > seg.s0 + 1e-12 && s < seg.s1 - 1e-12) crossings.push_back(s);
        }
      }
      std::sort(crossings.begin(), crossings.end());
      const int row = ai * p + ri;
      for (std::size_t k = 0; k + 1 < crossings.size(); ++k) {
        const double len = crossings[k + 1] - crossings[k];
        if (len <= 1e-12) continue;
        const double sm = 0.5 * (crossings[k] + crossings[k + 1]);
        const int px = static_cast<int>(std::floor(ox + sm * dx));
        const int py = static_cast<int>(std::floor(oy + sm * dy));
        if (px < 0 || px >= nn || py < 0 || py >= nn) continue;
        a(row, px * nn + py) += len;  // pixel (row=py, col=px), column-major
      }
    }
  }

  if (variant != TomoVariant::real) {
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = a(i, j) > kHitTol ? 1.0 : 0.0;
    }
  }
  if (variant == TomoVariant::perturbed) {
    Rng rng(seed);
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < n; ++j) {
        if (a(i, j) != 0.0) {
          a(i, j) *= 1.0 + rng.uniform(-perturb_scale, perturb_scale);
        }
      }
    }
  }

  if (geom.mask == TomoMask::circle) {
    const double r2 = c * c;
    for (int col = 0; col < nn; ++col) {
      for (int row = 0; row < nn; ++row) {
        const double ddx = (col + 0.5) - c;
        const double ddy = (row + 0.5) - c;
        if (ddx * ddx + ddy * ddy > r2) a.col(col * nn + row).setZero();
      }
    }
  }

  // Mandatory empty-row pruning; the returned row count is the usable m.
  std::vector<int> keep;
  for (int i = 0; i < a.rows(); ++i) {
    if (a.row(i).cwiseAbs().maxCoeff() > kHitTol) keep.push_back(i);
  }
  Matrix pruned(static_cast<Eigen::Index>(keep.size()), n);
  for (std::size_t k = 0; k < keep.size(); ++k) pruned.row(k) = a.row(keep[k]);
  return pruned;
}

}  // namespace certilab
