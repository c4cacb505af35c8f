#include <cmath>

#include "nlretinex/simd/kernels.hpp"

namespace nlretinex::simd {
namespace {

void weighted_diff(double* out, const double* w, const double* a, const double* b, std::size_t n) {
  for (std::size_t x = 0; x < n; ++x) out[x] = w[x] * (a[x] - b[x]);
}

void accum_weighted_diff(double* acc, const double* w, const double* a, const double* b, double s, std::size_t n) {
  for (std::size_t x = 0; x < n; ++x) acc[x] = acc[x] + s * (w[x] * (a[x] - b[x]));
}

void shrink_weighted_diff(double* acc, const double* w, const double* a, const double* b, double s, double c,
                          std::size_t n) {
  for (std::size_t x = 0; x < n; ++x) acc[x] = c * (acc[x] + s * (w[x] * (a[x] - b[x])));
}

void accum_sq_weighted_diff(double* acc, const double* w, const double* a, const double* b, std::size_t n) {
  for (std::size_t x = 0; x < n; ++x) {
    const double d = w[x] * (a[x] - b[x]);
    acc[x] = acc[x] + d * d;
  }
}

void accum_sq(double* acc, const double* v, std::size_t n) {
  for (std::size_t x = 0; x < n; ++x) acc[x] = acc[x] + v[x] * v[x];
}

void accum_product(double* acc, const double* a, const double* b, std::size_t n) {
  for (std::size_t x = 0; x < n; ++x) acc[x] = acc[x] + a[x] * b[x];
}

void sub_product(double* acc, const double* a, const double* b, std::size_t n) {
  for (std::size_t x = 0; x < n; ++x) acc[x] = acc[x] - a[x] * b[x];
}

void ball_factor(double* f, const double* norm2, double r, std::size_t n) {
  for (std::size_t x = 0; x < n; ++x) {
    const double len = std::sqrt(norm2[x]);
    f[x] = r / (len > r ? len : r);
  }
}

void scale_inplace(double* v, const double* f, std::size_t n) {
  for (std::size_t x = 0; x < n; ++x) v[x] = v[x] * f[x];
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t x = 0; x < n; ++x) s += a[x] * b[x];
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",          weighted_diff, accum_weighted_diff, shrink_weighted_diff, accum_sq_weighted_diff, accum_sq,
      accum_product,     sub_product,   ball_factor,         scale_inplace,        dot,
  };
  return table;
}

}  // namespace nlretinex::simd
