#include <cmath>
#include <cstddef>

#include "treemem/kernels.hpp"

namespace treemem::kern {

// Reference kernels. The AVX2 variants must reproduce these bit for bit, so
// every operation order here is part of the contract.

namespace scalar {

void add_pairs(double* dst, const double* src, std::size_t n_dst) {
  for (std::size_t i = 0; i < n_dst; ++i) dst[i] = src[2 * i] + src[2 * i + 1];
}

void mean_pairs(double* dst, const double* src, std::size_t n_dst) {
  for (std::size_t i = 0; i < n_dst; ++i) dst[i] = (src[2 * i] + src[2 * i + 1]) * 0.5;
}

void upsample2(double* dst, const double* src, std::size_t n_dst) {
  for (std::size_t i = 0; i < n_dst; ++i) dst[i] = src[i / 2];
}

void combine2(double* dst, double a, const double* x, double b, const double* y,
              std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double t1 = a * x[i];
    double t2 = b * y[i];
    dst[i] = t1 + t2;
  }
}

void combine3(double* dst, double a, const double* x, double b, const double* y,
              const double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double t1 = a * x[i];
    double t2 = b * y[i];
    dst[i] = (t1 + t2) + z[i];
  }
}

void max_with(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = dst[i] > src[i] ? dst[i] : src[i];
}

void min_with(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = dst[i] < src[i] ? dst[i] : src[i];
}

double sup_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

}  // namespace scalar

const KernelOps& scalar_ops() {
  static const KernelOps k{scalar::add_pairs, scalar::mean_pairs, scalar::upsample2,
                           scalar::combine2, scalar::combine3, scalar::max_with,
                           scalar::min_with, scalar::sup_abs_diff, "scalar"};
  return k;
}

}  // namespace treemem::kern
