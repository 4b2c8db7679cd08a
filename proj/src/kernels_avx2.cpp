#include <cstddef>

#include "treemem/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace treemem::kern {

// AVX2 variants. No FMA anywhere: the scalar reference computes mul, mul, add
// and these kernels must match it bit for bit.

namespace avx2 {

// (s0+s1, s2+s3, s4+s5, s6+s7) from two consecutive 4-lane loads.
static inline __m256d pair_add8(const double* src) {
  __m256d v0 = _mm256_loadu_pd(src);
  __m256d v1 = _mm256_loadu_pd(src + 4);
  __m256d h = _mm256_hadd_pd(v0, v1);              // (s0+s1, s4+s5, s2+s3, s6+s7)
  return _mm256_permute4x64_pd(h, 0b11011000);     // lanes 0,2,1,3
}

void add_pairs(double* dst, const double* src, std::size_t n_dst) {
  std::size_t i = 0;
  for (; i + 4 <= n_dst; i += 4) _mm256_storeu_pd(dst + i, pair_add8(src + 2 * i));
  for (; i < n_dst; ++i) dst[i] = src[2 * i] + src[2 * i + 1];
}

void mean_pairs(double* dst, const double* src, std::size_t n_dst) {
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n_dst; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(pair_add8(src + 2 * i), half));
  for (; i < n_dst; ++i) dst[i] = (src[2 * i] + src[2 * i + 1]) * 0.5;
}

void upsample2(double* dst, const double* src, std::size_t n_dst) {
  std::size_t i = 0;
  for (; i + 8 <= n_dst; i += 8) {
    __m256d v = _mm256_loadu_pd(src + i / 2);
    _mm256_storeu_pd(dst + i, _mm256_permute4x64_pd(v, 0b01010000));      // s0 s0 s1 s1
    _mm256_storeu_pd(dst + i + 4, _mm256_permute4x64_pd(v, 0b11111010));  // s2 s2 s3 s3
  }
  for (; i < n_dst; ++i) dst[i] = src[i / 2];
}

void combine2(double* dst, double a, const double* x, double b, const double* y,
              std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t1 = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    __m256d t2 = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(dst + i, _mm256_add_pd(t1, t2));
  }
  for (; i < n; ++i) {
    double t1 = a * x[i];
    double t2 = b * y[i];
    dst[i] = t1 + t2;
  }
}

void combine3(double* dst, double a, const double* x, double b, const double* y,
              const double* z, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t1 = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    __m256d t2 = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    __m256d s = _mm256_add_pd(t1, t2);
    _mm256_storeu_pd(dst + i, _mm256_add_pd(s, _mm256_loadu_pd(z + i)));
  }
  for (; i < n; ++i) {
    double t1 = a * x[i];
    double t2 = b * y[i];
    dst[i] = (t1 + t2) + z[i];
  }
}

void max_with(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_max_pd(_mm256_loadu_pd(dst + i), _mm256_loadu_pd(src + i)));
  for (; i < n; ++i) dst[i] = dst[i] > src[i] ? dst[i] : src[i];
}

void min_with(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_min_pd(_mm256_loadu_pd(dst + i), _mm256_loadu_pd(src + i)));
  for (; i < n; ++i) dst[i] = dst[i] < src[i] ? dst[i] : src[i];
}

double sup_abs_diff(const double* a, const double* b, std::size_t n) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    vm = _mm256_max_pd(vm, _mm256_and_pd(d, absmask));
  }
  double lanes[4];
  _mm256_storeu_pd(lanes, vm);
  double m = lanes[0];
  for (int l = 1; l < 4; ++l)
    if (lanes[l] > m) m = lanes[l];
  for (; i < n; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

}  // namespace avx2

const KernelOps* avx2_ops() {
  static const KernelOps k{avx2::add_pairs, avx2::mean_pairs, avx2::upsample2,
                           avx2::combine2, avx2::combine3, avx2::max_with,
                           avx2::min_with, avx2::sup_abs_diff, "avx2"};
  return &k;
}

}  // namespace treemem::kern

#else

namespace treemem::kern {
const KernelOps* avx2_ops() { return nullptr; }
}  // namespace treemem::kern

#endif
