#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "certilab/matrix.hpp"

namespace certilab {

enum class ValueClass { real, nonnegative, binary };
enum class SignalStructure { sparse, gradient_sparse_1d, gradient_sparse_2d };

ValueClass value_class_by_name(const std::string& s);
SignalStructure structure_by_name(const std::string& s);

struct SignalSpec {
  int n = 0;             // ambient dimension; image side for 2d
  double rho = 0.1;      // target relative sparsity
  ValueClass value_class = ValueClass::real;
  SignalStructure structure = SignalStructure::sparse;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedSignal {
  Vector x;
  bool rho_warning = false;  // 2d generator could not reach the target band
};

// Exactly round(rho*n) nonzeros at a uniform support; values are standard
// normal / |normal| / 1 by class.
Vector gen_sparse_1d(const SignalSpec& spec);

// Projection of a dense random v onto N(D_Lambda):
//   x = (I - D_L'(D_L D_L')^{-1} D_L) v.
// nullopt when D_Lambda is rank deficient (caller resamples Lambda).
std::optional<Vector> gen_cosupport_projection(const Matrix& d,
                                               const std::vector<int>& lambda,
                                               std::uint64_t seed);

// Binary signal whose forward-difference cosupport equals Lambda exactly:
// x_1 = 1, then copy across indices in Lambda and flip elsewhere.
Vector binary_from_cosupport(const std::vector<int>& lambda, int n);

// Piecewise-constant 1D signal with ||d_n x||_0 = round(rho*(n-1)), values
// per class (nonnegative resamples if taking |.| moved the cosupport).
Vector gen_gradient_sparse_1d(const SignalSpec& spec);

// 2D generator: XOR-superimposed random rectangles until ||grad x||_0 / p
// lands within +-0.02 of rho (or the closest achievable), then relabels
// 4-connected components with random values for the real/nonnegative
// classes.  Column-major image of side spec.n.
GeneratedSignal gen_gradient_sparse_2d(const SignalSpec& spec);

// Dispatch on spec.structure.
GeneratedSignal generate_signal(const SignalSpec& spec);

// Relative sparsity actually achieved (||x||_0/n or ||Dx||_0/p).
double achieved_relative_sparsity(const SignalSpec& spec, const Vector& x,
                                  double act_tol = 1e-9);

// Zeroes pixels whose centers fall outside the inscribed circle of an
// N x N image (the tomographic testset convention).
Vector apply_circle_mask(const Vector& image, int side);

}  // namespace certilab
