#pragma once

#include <cstddef>

namespace hsims::simd {

// Elementwise kernels that dominate solver runtime. Every entry has a scalar
// reference implementation and may have vector variants; variants must agree
// with the reference bit for bit, which the test suite enforces. That works
// because each kernel is elementwise (or an order-free min/max reduction) and
// both paths issue the same correctly rounded IEEE operations per element.
struct Kernels {
  const char* name;

  // Reduction over finite values; n >= 1.
  void (*minmax)(const double* x, std::size_t n, double* mn, double* mx);

  // dst[i] = (src[i] - lo) / range
  void (*normalize01)(double* dst, const double* src, std::size_t n, double lo,
                      double range);

  // dst[i] = a[i] - s * b[i]
  void (*sub_scaled)(double* dst, const double* a, const double* b, double s,
                     std::size_t n);

  // dst[i] = cur[i] + theta * (cur[i] - prev[i])
  void (*extrapolate)(double* dst, const double* cur, const double* prev,
                      double theta, std::size_t n);

  // max_i |a[i] - b[i]|
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);

  // Ascent step on the dual variable followed by projection onto the unit
  // ball, all classes of one image at once. ubar is H x W x k (class
  // innermost); p is H x W x k x 2 with (x, y) pairs innermost. Forward
  // differences with zero derivative at the far boundary, scaled by inv_h.
  void (*dual_ascent)(double* p, const double* ubar, int height, int width,
                      int classes, double sigma, double inv_h);

  // dst = u - tau * div_adj(p), where div_adj is the exact adjoint of the
  // forward-difference gradient above. Layouts as in dual_ascent.
  void (*primal_descent)(double* dst, const double* u, const double* p,
                         int height, int width, int classes, double tau,
                         double inv_h);

  // out[px] = || B (g_px - mean) ||^2 for a row of spectra (count x bands,
  // spectrum contiguous). whitener_cols stores B column-major:
  // whitener_cols[c * bands + r] = B(r, c).
  void (*mahalanobis_sq)(double* out, const double* spectra, std::size_t count,
                         int bands, const double* whitener_cols,
                         const double* mean);

  // dst[i] = sqrt(q[i] + eta) + shift
  void (*sqrt_shift)(double* dst, const double* q, std::size_t n, double eta,
                     double shift);
};

// Kernel table picked at startup: AVX2 when the build and the CPU support it,
// scalar otherwise. HSIMS_SIMD=scalar|avx2 forces a choice (forcing avx2 on
// an unsupported CPU falls back to scalar).
const Kernels& active();

const Kernels& scalar_kernels();
// Null when not compiled in or not supported by this CPU.
const Kernels* avx2_kernels();

}  // namespace hsims::simd
