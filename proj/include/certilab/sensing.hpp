#pragma once

#include <cstdint>
#include <string>

#include "certilab/matrix.hpp"

namespace certilab {

enum class TomoVariant { binary, perturbed, real };
enum class TomoMask { circle, rectangle };

TomoVariant tomo_variant_by_name(const std::string& s);

// Parallel-beam geometry over an N x N pixel grid (pixel side 1, image
// square [0,N]^2).  Rays per angle default to round(sqrt(2)*N), spaced
// uniformly across the circumscribed width N*sqrt(2); angles equidistant
// in [0, pi).
struct TomoGeometry {
  int side = 0;            // N
  int num_angles = 1;
  int rays_per_angle = 0;  // 0 => round(sqrt(2)*N)
  TomoMask mask = TomoMask::circle;

  int effective_rays() const;
  void validate() const;
};

// i.i.d. standard normal m x n, deterministic under seed.
Matrix gaussian_matrix(int m, int n, std::uint64_t seed);

// Tomographic system matrix.  real: entry = intersection length of the ray
// with the pixel square (Siddon-style parametric traversal); binary:
// indicator of a positive intersection; perturbed: binary entries scaled
// by (1 + eta), eta ~ U[-perturb_scale, perturb_scale].  The circle mask
// zeroes columns of pixels centered outside the inscribed circle; all-zero
// rows are pruned afterwards (mandatory), so the returned row count is the
// effective m.  Column-major pixel order, angle-major row order.
Matrix tomo_matrix(const TomoGeometry& geom, TomoVariant variant,
                   double perturb_scale, std::uint64_t seed);

inline Matrix tomo_matrix(const TomoGeometry& geom, TomoVariant variant,
                          std::uint64_t seed) {
  return tomo_matrix(geom, variant, 1e-3, seed);
}

}  // namespace certilab
