#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace treemem::kern {

// Per-level array kernels behind the solvers' inner loops. Scalar reference
// implementations and AVX2 variants share one contract: identical operation
// order, hence bit-identical results (the project builds with
// -ffp-contract=off so the compiler cannot fuse the scalar path differently).
//
// Variant selection happens once, at first use: AVX2 when the CPU supports it,
// overridable with TREEMEM_SIMD=scalar|avx2|auto.
struct KernelOps {
  // dst[i] = src[2i] + src[2i+1]
  void (*add_pairs)(double* dst, const double* src, std::size_t n_dst);
  // dst[i] = (src[2i] + src[2i+1]) * 0.5
  void (*mean_pairs)(double* dst, const double* src, std::size_t n_dst);
  // dst[i] = src[i/2]
  void (*upsample2)(double* dst, const double* src, std::size_t n_dst);
  // dst[i] = a*x[i] + b*y[i]
  void (*combine2)(double* dst, double a, const double* x, double b, const double* y,
                   std::size_t n);
  // dst[i] = (a*x[i] + b*y[i]) + z[i]
  void (*combine3)(double* dst, double a, const double* x, double b, const double* y,
                   const double* z, std::size_t n);
  // dst[i] = max(dst[i], src[i]); min_with analogous
  void (*max_with)(double* dst, const double* src, std::size_t n);
  void (*min_with)(double* dst, const double* src, std::size_t n);
  // max_i |a[i] - b[i]| (0 for n = 0)
  double (*sup_abs_diff)(const double* a, const double* b, std::size_t n);

  const char* name;
};

const KernelOps& ops();
// Active variant name ("scalar" or "avx2"), for reports.
std::string active_variant();

// --- drivers (variant-independent logic) ---

// dst[i] = mean of src[m*i .. m*i+m-1]; m = 2 uses the dispatched pair kernel.
void mean_children(double* dst, const double* src, std::size_t n_dst, int m);

// dst[i] = src[i/m]
void upsample(double* dst, const double* src, std::size_t n_dst, int m);

// Deterministic pairwise summation: repeated add_pairs passes, odd tail
// elements carried through unchanged. Result does not depend on threading or
// SIMD variant.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

}  // namespace treemem::kern
