#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "treemem/kernels.hpp"

namespace treemem::kern {

const KernelOps& scalar_ops();
const KernelOps* avx2_ops();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelOps& resolve() {
  const char* req = std::getenv("TREEMEM_SIMD");
  if (req && std::strcmp(req, "scalar") == 0) return scalar_ops();
  if (req && std::strcmp(req, "avx2") == 0) {
    const KernelOps* a = avx2_ops();
    if (!a || !cpu_has_avx2())
      throw std::runtime_error("TREEMEM_SIMD=avx2 requested but AVX2 is unavailable");
    return *a;
  }
  if (const KernelOps* a = avx2_ops(); a && cpu_has_avx2()) return *a;
  return scalar_ops();
}

}  // namespace

const KernelOps& ops() {
  static const KernelOps& k = resolve();
  return k;
}

std::string active_variant() { return ops().name; }

void mean_children(double* dst, const double* src, std::size_t n_dst, int m) {
  if (m == 2) {
    ops().mean_pairs(dst, src, n_dst);
    return;
  }
  const double inv = static_cast<double>(m);
  for (std::size_t i = 0; i < n_dst; ++i) {
    double s = src[i * m];
    for (int j = 1; j < m; ++j) s += src[i * m + j];
    dst[i] = s / inv;
  }
}

void upsample(double* dst, const double* src, std::size_t n_dst, int m) {
  if (m == 2) {
    ops().upsample2(dst, src, n_dst);
    return;
  }
  for (std::size_t i = 0; i < n_dst; ++i) dst[i] = src[i / m];
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  std::vector<double> buf(x, x + n);
  std::size_t len = n;
  while (len > 1) {
    std::size_t half = len / 2;
    // In-place pass is safe: the write index i trails the read indices 2i, 2i+1.
    ops().add_pairs(buf.data(), buf.data(), half);
    if (len % 2) {  // odd tail element carried through
      buf[half] = buf[len - 1];
      len = half + 1;
    } else {
      len = half;
    }
  }
  return buf[0];
}

double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

}  // namespace treemem::kern
