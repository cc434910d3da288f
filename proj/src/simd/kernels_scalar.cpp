// Scalar reference kernels. The AVX2 variants mirror these operation for
// operation; any change here must be made there as well or the bit-exact
// equivalence tests will fail.

#include <cmath>
#include <vector>

#include "hsims/simd.hpp"

namespace hsims::simd {
namespace {

void k_minmax(const double* x, std::size_t n, double* mn, double* mx) {
  double lo = x[0], hi = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  *mn = lo;
  *mx = hi;
}

void k_normalize01(double* dst, const double* src, std::size_t n, double lo,
                   double range) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = (src[i] - lo) / range;
}

void k_sub_scaled(double* dst, const double* a, const double* b, double s,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - s * b[i];
}

void k_extrapolate(double* dst, const double* cur, const double* prev,
                   double theta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = cur[i] + theta * (cur[i] - prev[i]);
}

double k_max_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

void k_dual_ascent(double* p, const double* ubar, int height, int width,
                   int classes, double sigma, double inv_h) {
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      std::size_t base = (static_cast<std::size_t>(i) * width + j) * classes;
      const double* ub = ubar + base;
      const double* ubr = ub + classes;
      const double* ubd = ub + static_cast<std::size_t>(width) * classes;
      double* pp = p + base * 2;
      for (int l = 0; l < classes; ++l) {
        double gx = (j + 1 < width) ? (ubr[l] - ub[l]) * inv_h : 0.0;
        double gy = (i + 1 < height) ? (ubd[l] - ub[l]) * inv_h : 0.0;
        double px = pp[2 * l] + sigma * gx;
        double py = pp[2 * l + 1] + sigma * gy;
        double n2 = px * px + py * py;
        if (n2 > 1.0) {
          double s = 1.0 / std::sqrt(n2);
          px *= s;
          py *= s;
        }
        pp[2 * l] = px;
        pp[2 * l + 1] = py;
      }
    }
  }
}

void k_primal_descent(double* dst, const double* u, const double* p,
                      int height, int width, int classes, double tau,
                      double inv_h) {
  std::size_t wk = static_cast<std::size_t>(width) * classes;
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      std::size_t base = (static_cast<std::size_t>(i) * width + j) * classes;
      const double* pp = p + base * 2;
      const double* pl = p + (base - classes) * 2;  // left neighbour
      const double* pu = p + (base - wk) * 2;       // upper neighbour
      for (int l = 0; l < classes; ++l) {
        double t1 = 0.0;
        if (j + 1 < width) t1 -= pp[2 * l];
        if (j > 0) t1 += pl[2 * l];
        double t2 = 0.0;
        if (i + 1 < height) t2 -= pp[2 * l + 1];
        if (i > 0) t2 += pu[2 * l + 1];
        double adj = (t1 + t2) * inv_h;
        dst[base + l] = u[base + l] - tau * adj;
      }
    }
  }
}

void k_mahalanobis_sq(double* out, const double* spectra, std::size_t count,
                      int bands, const double* whitener_cols,
                      const double* mean) {
  std::vector<double> acc(bands);
  for (std::size_t px = 0; px < count; ++px) {
    const double* g = spectra + px * bands;
    for (int r = 0; r < bands; ++r) acc[r] = 0.0;
    for (int c = 0; c < bands; ++c) {
      double d = g[c] - mean[c];
      const double* col = whitener_cols + static_cast<std::size_t>(c) * bands;
      for (int r = 0; r < bands; ++r) acc[r] = std::fma(col[r], d, acc[r]);
    }
    double s = 0.0;
    for (int r = 0; r < bands; ++r) s = std::fma(acc[r], acc[r], s);
    out[px] = s;
  }
}

void k_sqrt_shift(double* dst, const double* q, std::size_t n, double eta,
                  double shift) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = std::sqrt(q[i] + eta) + shift;
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {
      "scalar",      k_minmax,         k_normalize01, k_sub_scaled,
      k_extrapolate, k_max_abs_diff,   k_dual_ascent, k_primal_descent,
      k_mahalanobis_sq, k_sqrt_shift,
  };
  return k;
}

}  // namespace hsims::simd
