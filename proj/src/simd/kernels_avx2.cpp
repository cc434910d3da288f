// AVX2 variants. Compiled with -mavx2 -mfma; selected at runtime only when
// the CPU agrees. Each kernel issues the same correctly rounded operations
// per element as the scalar reference, so results are bit-identical.

#include "hsims/simd.hpp"

#ifdef HSIMS_BUILD_AVX2

#include <immintrin.h>

#include <cmath>
#include <vector>

namespace hsims::simd {

const Kernels* avx2_kernels_impl();

namespace {

void k_minmax(const double* x, std::size_t n, double* mn, double* mx) {
  std::size_t i = 0;
  double lo, hi;
  if (n >= 4) {
    __m256d vlo = _mm256_loadu_pd(x);
    __m256d vhi = vlo;
    for (i = 4; i + 4 <= n; i += 4) {
      __m256d v = _mm256_loadu_pd(x + i);
      vlo = _mm256_min_pd(vlo, v);
      vhi = _mm256_max_pd(vhi, v);
    }
    double bl[4], bh[4];
    _mm256_storeu_pd(bl, vlo);
    _mm256_storeu_pd(bh, vhi);
    lo = bl[0];
    hi = bh[0];
    for (int r = 1; r < 4; ++r) {
      if (bl[r] < lo) lo = bl[r];
      if (bh[r] > hi) hi = bh[r];
    }
  } else {
    lo = hi = x[0];
    i = 1;
  }
  for (; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  *mn = lo;
  *mx = hi;
}

void k_normalize01(double* dst, const double* src, std::size_t n, double lo,
                   double range) {
  __m256d vlo = _mm256_set1_pd(lo);
  __m256d vr = _mm256_set1_pd(range);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(src + i);
    _mm256_storeu_pd(dst + i, _mm256_div_pd(_mm256_sub_pd(v, vlo), vr));
  }
  for (; i < n; ++i) dst[i] = (src[i] - lo) / range;
}

void k_sub_scaled(double* dst, const double* a, const double* b, double s,
                  std::size_t n) {
  __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    _mm256_storeu_pd(dst + i, _mm256_sub_pd(va, _mm256_mul_pd(vs, vb)));
  }
  for (; i < n; ++i) dst[i] = a[i] - s * b[i];
}

void k_extrapolate(double* dst, const double* cur, const double* prev,
                   double theta, std::size_t n) {
  __m256d vt = _mm256_set1_pd(theta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vc = _mm256_loadu_pd(cur + i);
    __m256d vp = _mm256_loadu_pd(prev + i);
    __m256d d = _mm256_sub_pd(vc, vp);
    _mm256_storeu_pd(dst + i, _mm256_add_pd(vc, _mm256_mul_pd(vt, d)));
  }
  for (; i < n; ++i) dst[i] = cur[i] + theta * (cur[i] - prev[i]);
}

double k_max_abs_diff(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    vm = _mm256_max_pd(vm, _mm256_andnot_pd(sign, d));
  }
  double buf[4];
  _mm256_storeu_pd(buf, vm);
  double m = buf[0];
  for (int r = 1; r < 4; ++r)
    if (buf[r] > m) m = buf[r];
  for (; i < n; ++i) {
    double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

// [a0 a1 a2 a3], [b0 b1 b2 b3] -> [a0 b0 a1 b1], [a2 b2 a3 b3]
inline void interleave2(__m256d a, __m256d b, __m256d* lo, __m256d* hi) {
  __m256d u = _mm256_unpacklo_pd(a, b);  // a0 b0 a2 b2
  __m256d v = _mm256_unpackhi_pd(a, b);  // a1 b1 a3 b3
  *lo = _mm256_permute2f128_pd(u, v, 0x20);
  *hi = _mm256_permute2f128_pd(u, v, 0x31);
}

// Even/odd elements of two consecutive pair vectors.
inline __m256d even_of(__m256d v0, __m256d v1) {
  return _mm256_permute4x64_pd(_mm256_unpacklo_pd(v0, v1), 0xD8);
}
inline __m256d odd_of(__m256d v0, __m256d v1) {
  return _mm256_permute4x64_pd(_mm256_unpackhi_pd(v0, v1), 0xD8);
}

inline void dual_ascent_cell(double* pp, const double* ub, const double* ubr,
                             const double* ubd, int l, int classes,
                             bool has_right, bool has_down, double sigma,
                             double inv_h) {
  for (; l < classes; ++l) {
    double gx = has_right ? (ubr[l] - ub[l]) * inv_h : 0.0;
    double gy = has_down ? (ubd[l] - ub[l]) * inv_h : 0.0;
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

inline __m256d ball_project(__m256d pr) {
  __m256d one = _mm256_set1_pd(1.0);
  __m256d sq = _mm256_mul_pd(pr, pr);
  __m256d n2 = _mm256_add_pd(sq, _mm256_permute_pd(sq, 0x5));
  __m256d mask = _mm256_cmp_pd(n2, one, _CMP_GT_OQ);
  __m256d scale = _mm256_div_pd(one, _mm256_sqrt_pd(n2));
  return _mm256_blendv_pd(pr, _mm256_mul_pd(pr, scale), mask);
}

void k_dual_ascent(double* p, const double* ubar, int height, int width,
                   int classes, double sigma, double inv_h) {
  __m256d vs = _mm256_set1_pd(sigma);
  __m256d vih = _mm256_set1_pd(inv_h);
  std::size_t wk = static_cast<std::size_t>(width) * classes;
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      std::size_t base = (static_cast<std::size_t>(i) * width + j) * classes;
      const double* ub = ubar + base;
      const double* ubr = ub + classes;
      const double* ubd = ub + wk;
      double* pp = p + base * 2;
      bool interior = (j + 1 < width) && (i + 1 < height);
      int l = 0;
      if (interior) {
        for (; l + 4 <= classes; l += 4) {
          __m256d u0 = _mm256_loadu_pd(ub + l);
          __m256d gx = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(ubr + l), u0), vih);
          __m256d gy = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(ubd + l), u0), vih);
          __m256d glo, ghi;
          interleave2(gx, gy, &glo, &ghi);
          __m256d p0 = _mm256_loadu_pd(pp + 2 * l);
          __m256d p1 = _mm256_loadu_pd(pp + 2 * l + 4);
          p0 = _mm256_add_pd(p0, _mm256_mul_pd(vs, glo));
          p1 = _mm256_add_pd(p1, _mm256_mul_pd(vs, ghi));
          _mm256_storeu_pd(pp + 2 * l, ball_project(p0));
          _mm256_storeu_pd(pp + 2 * l + 4, ball_project(p1));
        }
      }
      dual_ascent_cell(pp, ub, ubr, ubd, l, classes, j + 1 < width,
                       i + 1 < height, sigma, inv_h);
    }
  }
}

inline void primal_descent_cell(double* dst, const double* u, const double* p,
                                std::size_t base, std::size_t wk, int l,
                                int classes, int i, int j, int height,
                                int width, double tau, double inv_h) {
  const double* pp = p + base * 2;
  const double* pl = p + (base - classes) * 2;
  const double* pu = p + (base - wk) * 2;
  for (; l < classes; ++l) {
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

void k_primal_descent(double* dst, const double* u, const double* p,
                      int height, int width, int classes, double tau,
                      double inv_h) {
  __m256d vt = _mm256_set1_pd(tau);
  __m256d vih = _mm256_set1_pd(inv_h);
  std::size_t wk = static_cast<std::size_t>(width) * classes;
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      std::size_t base = (static_cast<std::size_t>(i) * width + j) * classes;
      bool interior = i > 0 && j > 0 && (i + 1 < height) && (j + 1 < width);
      int l = 0;
      if (interior) {
        const double* pp = p + base * 2;
        const double* pl = p + (base - classes) * 2;
        const double* pu = p + (base - wk) * 2;
        for (; l + 4 <= classes; l += 4) {
          __m256d pp0 = _mm256_loadu_pd(pp + 2 * l);
          __m256d pp1 = _mm256_loadu_pd(pp + 2 * l + 4);
          __m256d pl0 = _mm256_loadu_pd(pl + 2 * l);
          __m256d pl1 = _mm256_loadu_pd(pl + 2 * l + 4);
          __m256d pu0 = _mm256_loadu_pd(pu + 2 * l);
          __m256d pu1 = _mm256_loadu_pd(pu + 2 * l + 4);
          __m256d t1 = _mm256_sub_pd(even_of(pl0, pl1), even_of(pp0, pp1));
          __m256d t2 = _mm256_sub_pd(odd_of(pu0, pu1), odd_of(pp0, pp1));
          __m256d adj = _mm256_mul_pd(_mm256_add_pd(t1, t2), vih);
          __m256d uu = _mm256_loadu_pd(u + base + l);
          _mm256_storeu_pd(dst + base + l,
                           _mm256_sub_pd(uu, _mm256_mul_pd(vt, adj)));
        }
      }
      primal_descent_cell(dst, u, p, base, wk, l, classes, i, j, height, width,
                          tau, inv_h);
    }
  }
}

void k_mahalanobis_sq(double* out, const double* spectra, std::size_t count,
                      int bands, const double* whitener_cols,
                      const double* mean) {
  int nv = bands / 4;
  std::vector<double> accbuf(bands);
  for (std::size_t px = 0; px < count; ++px) {
    const double* g = spectra + px * bands;
    std::fill(accbuf.begin(), accbuf.end(), 0.0);
    for (int c = 0; c < bands; ++c) {
      double d = g[c] - mean[c];
      __m256d vd = _mm256_set1_pd(d);
      const double* col = whitener_cols + static_cast<std::size_t>(c) * bands;
      for (int v = 0; v < nv; ++v) {
        double* a = accbuf.data() + 4 * v;
        _mm256_storeu_pd(
            a, _mm256_fmadd_pd(_mm256_loadu_pd(col + 4 * v), vd, _mm256_loadu_pd(a)));
      }
      for (int r = nv * 4; r < bands; ++r)
        accbuf[r] = std::fma(col[r], d, accbuf[r]);
    }
    double s = 0.0;
    for (int r = 0; r < bands; ++r) s = std::fma(accbuf[r], accbuf[r], s);
    out[px] = s;
  }
}

void k_sqrt_shift(double* dst, const double* q, std::size_t n, double eta,
                  double shift) {
  __m256d ve = _mm256_set1_pd(eta);
  __m256d vc = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_sqrt_pd(_mm256_add_pd(_mm256_loadu_pd(q + i), ve));
    _mm256_storeu_pd(dst + i, _mm256_add_pd(v, vc));
  }
  for (; i < n; ++i) dst[i] = std::sqrt(q[i] + eta) + shift;
}

}  // namespace

const Kernels* avx2_kernels_impl() {
  static const Kernels k = {
      "avx2",        k_minmax,         k_normalize01, k_sub_scaled,
      k_extrapolate, k_max_abs_diff,   k_dual_ascent, k_primal_descent,
      k_mahalanobis_sq, k_sqrt_shift,
  };
  return &k;
}

}  // namespace hsims::simd

#endif  // HSIMS_BUILD_AVX2
