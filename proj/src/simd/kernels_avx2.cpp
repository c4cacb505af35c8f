// Compiled with -mavx2 only (no -mfma) so no multiply-add gets contracted.
#include <immintrin.h>

#include <cmath>

#include "nlretinex/simd/kernels.hpp"

namespace nlretinex::simd {
namespace {

constexpr std::size_t kLanes = 4;

void weighted_diff(double* out, const double* w, const double* a, const double* b, std::size_t n) {
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + x), _mm256_loadu_pd(b + x));
    _mm256_storeu_pd(out + x, _mm256_mul_pd(_mm256_loadu_pd(w + x), d));
  }
  for (; x < n; ++x) out[x] = w[x] * (a[x] - b[x]);
}

void accum_weighted_diff(double* acc, const double* w, const double* a, const double* b, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + x), _mm256_loadu_pd(b + x));
    const __m256d g = _mm256_mul_pd(_mm256_loadu_pd(w + x), d);
    _mm256_storeu_pd(acc + x, _mm256_add_pd(_mm256_loadu_pd(acc + x), _mm256_mul_pd(vs, g)));
  }
  for (; x < n; ++x) acc[x] = acc[x] + s * (w[x] * (a[x] - b[x]));
}

void shrink_weighted_diff(double* acc, const double* w, const double* a, const double* b, double s, double c,
                          std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + x), _mm256_loadu_pd(b + x));
    const __m256d g = _mm256_mul_pd(_mm256_loadu_pd(w + x), d);
    const __m256d t = _mm256_add_pd(_mm256_loadu_pd(acc + x), _mm256_mul_pd(vs, g));
    _mm256_storeu_pd(acc + x, _mm256_mul_pd(vc, t));
  }
  for (; x < n; ++x) acc[x] = c * (acc[x] + s * (w[x] * (a[x] - b[x])));
}

void accum_sq_weighted_diff(double* acc, const double* w, const double* a, const double* b, std::size_t n) {
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    const __m256d d = _mm256_mul_pd(_mm256_loadu_pd(w + x), _mm256_sub_pd(_mm256_loadu_pd(a + x), _mm256_loadu_pd(b + x)));
    _mm256_storeu_pd(acc + x, _mm256_add_pd(_mm256_loadu_pd(acc + x), _mm256_mul_pd(d, d)));
  }
  for (; x < n; ++x) {
    const double d = w[x] * (a[x] - b[x]);
    acc[x] = acc[x] + d * d;
  }
}

void accum_sq(double* acc, const double* v, std::size_t n) {
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    const __m256d t = _mm256_loadu_pd(v + x);
    _mm256_storeu_pd(acc + x, _mm256_add_pd(_mm256_loadu_pd(acc + x), _mm256_mul_pd(t, t)));
  }
  for (; x < n; ++x) acc[x] = acc[x] + v[x] * v[x];
}

void accum_product(double* acc, const double* a, const double* b, std::size_t n) {
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + x), _mm256_loadu_pd(b + x));
    _mm256_storeu_pd(acc + x, _mm256_add_pd(_mm256_loadu_pd(acc + x), p));
  }
  for (; x < n; ++x) acc[x] = acc[x] + a[x] * b[x];
}

void sub_product(double* acc, const double* a, const double* b, std::size_t n) {
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + x), _mm256_loadu_pd(b + x));
    _mm256_storeu_pd(acc + x, _mm256_sub_pd(_mm256_loadu_pd(acc + x), p));
  }
  for (; x < n; ++x) acc[x] = acc[x] - a[x] * b[x];
}

void ball_factor(double* f, const double* norm2, double r, std::size_t n) {
  const __m256d vr = _mm256_set1_pd(r);
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    const __m256d len = _mm256_sqrt_pd(_mm256_loadu_pd(norm2 + x));
    _mm256_storeu_pd(f + x, _mm256_div_pd(vr, _mm256_max_pd(len, vr)));
  }
  for (; x < n; ++x) {
    const double len = std::sqrt(norm2[x]);
    f[x] = r / (len > r ? len : r);
  }
}

void scale_inplace(double* v, const double* f, std::size_t n) {
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    _mm256_storeu_pd(v + x, _mm256_mul_pd(_mm256_loadu_pd(v + x), _mm256_loadu_pd(f + x)));
  }
  for (; x < n; ++x) v[x] = v[x] * f[x];
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t x = 0;
  for (; x + kLanes <= n; x += kLanes) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + x), _mm256_loadu_pd(b + x)));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; x < n; ++x) s += a[x] * b[x];
  return s;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{
      "avx2",        weighted_diff, accum_weighted_diff, shrink_weighted_diff, accum_sq_weighted_diff, accum_sq,
      accum_product, sub_product,   ball_factor,         scale_inplace,        dot,
  };
  return table;
}

}  // namespace nlretinex::simd
