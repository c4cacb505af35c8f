#pragma once

#include <cstddef>
#include <string_view>

namespace nlretinex::simd {

// Inner-loop kernels for the stencil operators. Every kernel works on
// contiguous row spans of length n; pointers may not alias unless noted.
//
// Elementwise kernels use plain multiply/add (no FMA contraction) so the
// vector variants are bitwise identical to the scalar reference. Only the
// reductions (dot) may differ in the last bits because of lane ordering.
struct KernelTable {
  std::string_view name;

  // out = w * (a - b)
  void (*weighted_diff)(double* out, const double* w, const double* a, const double* b, std::size_t n);
  // acc = acc + s * (w * (a - b))
  void (*accum_weighted_diff)(double* acc, const double* w, const double* a, const double* b, double s,
                              std::size_t n);
  // acc = c * (acc + s * (w * (a - b)))
  void (*shrink_weighted_diff)(double* acc, const double* w, const double* a, const double* b, double s, double c,
                               std::size_t n);
  // acc = acc + (w * (a - b))^2
  void (*accum_sq_weighted_diff)(double* acc, const double* w, const double* a, const double* b, std::size_t n);
  // acc = acc + v^2
  void (*accum_sq)(double* acc, const double* v, std::size_t n);
  // acc = acc + a * b
  void (*accum_product)(double* acc, const double* a, const double* b, std::size_t n);
  // acc = acc - a * b
  void (*sub_product)(double* acc, const double* a, const double* b, std::size_t n);
  // f = r / max(r, sqrt(norm2)); the scaling that projects onto the ball of radius r
  void (*ball_factor)(double* f, const double* norm2, double r, std::size_t n);
  // v = v * f
  void (*scale_inplace)(double* v, const double* f, std::size_t n);
  // sum a * b
  double (*dot)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Null when the build or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// Table picked once per process: AVX2 when the CPU supports it, unless the
/// NLRETINEX_SIMD environment variable is set to "scalar".
const KernelTable& kernels();

}  // namespace nlretinex::simd
