// AVX2+FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; it must never be entered unless avx2_supported().
// Reductions widen to double lanes so results track the scalar reference.

#include <immintrin.h>

#include <cstddef>
#include <cstdint>

#include "kernels_avx2.hpp"
#include "kernels_scalar.hpp"

namespace simam::kern::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline __m256d lo_pd(__m256 v) { return _mm256_cvtps_pd(_mm256_castps256_ps128(v)); }
inline __m256d hi_pd(__m256 v) { return _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)); }

// ---- float elementwise ----

void add_f(const float* a, const float* b, float* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(c + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) c[i] = a[i] + b[i];
}

void sub_f(const float* a, const float* b, float* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(c + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) c[i] = a[i] - b[i];
}

void mul_f(const float* a, const float* b, float* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(c + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) c[i] = a[i] * b[i];
}

void div_f(const float* a, const float* b, float* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(c + i, _mm256_div_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) c[i] = a[i] / b[i];
}

void axpy_f(float a, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void muladd_f(const float* a, const float* b, float* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(acc + i, _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i),
                                              _mm256_loadu_ps(acc + i)));
  for (; i < n; ++i) acc[i] += a[i] * b[i];
}

void add_scalar_f(float s, float* x, std::size_t n) {
  const __m256 sv = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_add_ps(_mm256_loadu_ps(x + i), sv));
  for (; i < n; ++i) x[i] += s;
}

void scale_f(float s, float* x, std::size_t n) {
  const __m256 sv = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), sv));
  for (; i < n; ++i) x[i] *= s;
}

double sum_f(const float* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    acc0 = _mm256_add_pd(acc0, lo_pd(v));
    acc1 = _mm256_add_pd(acc1, hi_pd(v));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += static_cast<double>(x[i]);
  return s;
}

double dot_f(const float* a, const float* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 av = _mm256_loadu_ps(a + i);
    __m256 bv = _mm256_loadu_ps(b + i);
    acc0 = _mm256_fmadd_pd(lo_pd(av), lo_pd(bv), acc0);
    acc1 = _mm256_fmadd_pd(hi_pd(av), hi_pd(bv), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

double sq_dev_sum_f(const float* x, double mu, std::size_t n) {
  const __m256d muv = _mm256_set1_pd(mu);
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    __m256d d0 = _mm256_sub_pd(lo_pd(v), muv);
    __m256d d1 = _mm256_sub_pd(hi_pd(v), muv);
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    double d = static_cast<double>(x[i]) - mu;
    s += d * d;
  }
  return s;
}

void normalize_affine_f(const float* x, float* y, std::size_t n, float mu, float inv_sigma,
                        float gamma, float beta) {
  const float a = gamma * inv_sigma;
  const float b = beta - mu * a;
  const __m256 av = _mm256_set1_ps(a), bv = _mm256_set1_ps(b);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), bv));
  for (; i < n; ++i) y[i] = a * x[i] + b;
}

// ---- double elementwise ----

void add_d(const double* a, const double* b, double* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(c + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] + b[i];
}

void sub_d(const double* a, const double* b, double* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(c + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] - b[i];
}

void mul_d(const double* a, const double* b, double* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(c + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] * b[i];
}

void div_d(const double* a, const double* b, double* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(c + i, _mm256_div_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] / b[i];
}

void axpy_d(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void muladd_d(const double* a, const double* b, double* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                              _mm256_loadu_pd(acc + i)));
  for (; i < n; ++i) acc[i] += a[i] * b[i];
}

void add_scalar_d(double s, double* x, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_loadu_pd(x + i), sv));
  for (; i < n; ++i) x[i] += s;
}

void scale_d(double s, double* x, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), sv));
  for (; i < n; ++i) x[i] *= s;
}

double sum_d(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot_d(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sq_dev_sum_d(const double* x, double mu, std::size_t n) {
  const __m256d muv = _mm256_set1_pd(mu);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), muv);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double d = x[i] - mu;
    s += d * d;
  }
  return s;
}

void normalize_affine_d(const double* x, double* y, std::size_t n, double mu, double inv_sigma,
                        double gamma, double beta) {
  const double a = gamma * inv_sigma;
  const double b = beta - mu * a;
  const __m256d av = _mm256_set1_pd(a), bv = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), bv));
  for (; i < n; ++i) y[i] = a * x[i] + b;
}

// ---- GEMM, row-major, C[MxN] (+)= A[MxK]·B[KxN] ----
// One output row at a time, 16 double accumulators held in 4 ymm registers.

void gemm_nn_f(const float* a, const float* b, float* c, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    float* crow = c + i * n;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
      __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(static_cast<double>(arow[p]));
        const float* bp = b + p * n + j;
        __m256 b01 = _mm256_loadu_ps(bp);
        __m256 b23 = _mm256_loadu_ps(bp + 8);
        acc0 = _mm256_fmadd_pd(av, lo_pd(b01), acc0);
        acc1 = _mm256_fmadd_pd(av, hi_pd(b01), acc1);
        acc2 = _mm256_fmadd_pd(av, lo_pd(b23), acc2);
        acc3 = _mm256_fmadd_pd(av, hi_pd(b23), acc3);
      }
      if (accumulate) {
        __m256 c01 = _mm256_loadu_ps(crow + j);
        __m256 c23 = _mm256_loadu_ps(crow + j + 8);
        acc0 = _mm256_add_pd(acc0, lo_pd(c01));
        acc1 = _mm256_add_pd(acc1, hi_pd(c01));
        acc2 = _mm256_add_pd(acc2, lo_pd(c23));
        acc3 = _mm256_add_pd(acc3, hi_pd(c23));
      }
      __m256 out01 = _mm256_set_m128(_mm256_cvtpd_ps(acc1), _mm256_cvtpd_ps(acc0));
      __m256 out23 = _mm256_set_m128(_mm256_cvtpd_ps(acc3), _mm256_cvtpd_ps(acc2));
      _mm256_storeu_ps(crow + j, out01);
      _mm256_storeu_ps(crow + j + 8, out23);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? static_cast<double>(crow[j]) : 0.0;
      for (std::size_t p = 0; p < k; ++p)
        acc += static_cast<double>(arow[p]) * static_cast<double>(b[p * n + j]);
      crow[j] = static_cast<float>(acc);
    }
  }
}

void gemm_nn_d(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
      __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(arow[p]);
        const double* bp = b + p * n + j;
        acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 4), acc1);
        acc2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 8), acc2);
        acc3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 12), acc3);
      }
      if (accumulate) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(crow + j));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(crow + j + 4));
        acc2 = _mm256_add_pd(acc2, _mm256_loadu_pd(crow + j + 8));
        acc3 = _mm256_add_pd(acc3, _mm256_loadu_pd(crow + j + 12));
      }
      _mm256_storeu_pd(crow + j, acc0);
      _mm256_storeu_pd(crow + j + 4, acc1);
      _mm256_storeu_pd(crow + j + 8, acc2);
      _mm256_storeu_pd(crow + j + 12, acc3);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * b[p * n + j];
      crow[j] = acc;
    }
  }
}

// ---- depthwise convolution ----
// Stride-1 rows vectorize over the output x coordinate; everything else
// falls back to the scalar reference.

template <class T>
struct V;

template <>
struct V<float> {
  static constexpr std::size_t width = 8;
  static void accumulate_row(const float* x, double wv, __m256d& a0, __m256d& a1) {
    __m256 v = _mm256_loadu_ps(x);
    const __m256d wd = _mm256_set1_pd(wv);
    a0 = _mm256_fmadd_pd(wd, lo_pd(v), a0);
    a1 = _mm256_fmadd_pd(wd, hi_pd(v), a1);
  }
  static void store(float* y, __m256d a0, __m256d a1) {
    _mm256_storeu_ps(y, _mm256_set_m128(_mm256_cvtpd_ps(a1), _mm256_cvtpd_ps(a0)));
  }
  static void load_acc(const float* y, __m256d& a0, __m256d& a1) {
    __m256 v = _mm256_loadu_ps(y);
    a0 = lo_pd(v);
    a1 = hi_pd(v);
  }
};

template <>
struct V<double> {
  static constexpr std::size_t width = 8;
  static void accumulate_row(const double* x, double wv, __m256d& a0, __m256d& a1) {
    const __m256d wd = _mm256_set1_pd(wv);
    a0 = _mm256_fmadd_pd(wd, _mm256_loadu_pd(x), a0);
    a1 = _mm256_fmadd_pd(wd, _mm256_loadu_pd(x + 4), a1);
  }
  static void store(double* y, __m256d a0, __m256d a1) {
    _mm256_storeu_pd(y, a0);
    _mm256_storeu_pd(y + 4, a1);
  }
  static void load_acc(const double* y, __m256d& a0, __m256d& a1) {
    a0 = _mm256_loadu_pd(y);
    a1 = _mm256_loadu_pd(y + 4);
  }
};

template <class T>
void dwconv_fwd_s1(const T* x, const T* w, T* y, const ConvDims& d) {
  const std::int64_t hw_in = d.in_h * d.in_w, hw_out = d.out_h * d.out_w;
  const std::int64_t x0 = std::max<std::int64_t>(0, d.pad);
  const std::int64_t x1 = std::min<std::int64_t>(d.out_w, d.in_w - d.kernel + 1 + d.pad);
  constexpr std::int64_t vw = static_cast<std::int64_t>(V<T>::width);
  for (std::int64_t n = 0; n < d.batch; ++n) {
    for (std::int64_t c = 0; c < d.channels; ++c) {
      const T* xin = x + (n * d.channels + c) * hw_in;
      const T* wc = w + c * d.kernel * d.kernel;
      T* yout = y + (n * d.channels + c) * hw_out;
      for (std::int64_t oy = 0; oy < d.out_h; ++oy) {
        T* yrow = yout + oy * d.out_w;
        auto scalar_at = [&](std::int64_t ox) {
          double acc = 0.0;
          for (std::int64_t ky = 0; ky < d.kernel; ++ky) {
            const std::int64_t iy = oy + ky - d.pad;
            if (iy < 0 || iy >= d.in_h) continue;
            for (std::int64_t kx = 0; kx < d.kernel; ++kx) {
              const std::int64_t ix = ox + kx - d.pad;
              if (ix < 0 || ix >= d.in_w) continue;
              acc += static_cast<double>(xin[iy * d.in_w + ix]) *
                     static_cast<double>(wc[ky * d.kernel + kx]);
            }
          }
          yrow[ox] = static_cast<T>(acc);
        };
        std::int64_t ox = 0;
        for (; ox < std::min(x0, d.out_w); ++ox) scalar_at(ox);
        for (; ox + vw <= x1; ox += vw) {
          __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
          for (std::int64_t ky = 0; ky < d.kernel; ++ky) {
            const std::int64_t iy = oy + ky - d.pad;
            if (iy < 0 || iy >= d.in_h) continue;
            const T* xrow = xin + iy * d.in_w + ox - d.pad;
            for (std::int64_t kx = 0; kx < d.kernel; ++kx)
              V<T>::accumulate_row(xrow + kx, static_cast<double>(wc[ky * d.kernel + kx]), a0, a1);
          }
          V<T>::store(yrow + ox, a0, a1);
        }
        for (; ox < d.out_w; ++ox) scalar_at(ox);
      }
    }
  }
}

template <class T>
void dwconv_fwd_t(const T* x, const T* w, T* y, const ConvDims& d) {
  if (d.stride == 1 && d.out_w >= static_cast<std::int64_t>(V<T>::width))
    dwconv_fwd_s1(x, w, y, d);
  else
    scalar::dwconv_fwd(x, w, y, d);
}

// Stride-1 backward-data is a correlation of gy with the flipped kernel.
template <class T>
void dwconv_bwd_data_s1(const T* gy, const T* w, T* gx, const ConvDims& d) {
  const std::int64_t hw_in = d.in_h * d.in_w, hw_out = d.out_h * d.out_w;
  const std::int64_t rpad = d.kernel - 1 - d.pad;
  const std::int64_t x0 = std::max<std::int64_t>(0, rpad);
  const std::int64_t x1 = std::min<std::int64_t>(d.in_w, d.out_w - d.pad);
  constexpr std::int64_t vw = static_cast<std::int64_t>(V<T>::width);
  for (std::int64_t n = 0; n < d.batch; ++n) {
    for (std::int64_t c = 0; c < d.channels; ++c) {
      const T* g = gy + (n * d.channels + c) * hw_out;
      const T* wc = w + c * d.kernel * d.kernel;
      T* gin = gx + (n * d.channels + c) * hw_in;
      for (std::int64_t iy = 0; iy < d.in_h; ++iy) {
        T* grow = gin + iy * d.in_w;
        auto scalar_at = [&](std::int64_t ix) {
          double acc = 0.0;
          for (std::int64_t ky = 0; ky < d.kernel; ++ky) {
            const std::int64_t oy = iy - ky + d.pad;
            if (oy < 0 || oy >= d.out_h) continue;
            for (std::int64_t kx = 0; kx < d.kernel; ++kx) {
              const std::int64_t ox = ix - kx + d.pad;
              if (ox < 0 || ox >= d.out_w) continue;
              acc += static_cast<double>(g[oy * d.out_w + ox]) *
                     static_cast<double>(wc[ky * d.kernel + kx]);
            }
          }
          grow[ix] = static_cast<T>(static_cast<double>(grow[ix]) + acc);
        };
        std::int64_t ix = 0;
        for (; ix < std::min(x0, d.in_w); ++ix) scalar_at(ix);
        for (; ix + vw <= x1; ix += vw) {
          __m256d a0, a1;
          V<T>::load_acc(grow + ix, a0, a1);
          for (std::int64_t ky = 0; ky < d.kernel; ++ky) {
            const std::int64_t oy = iy - ky + d.pad;
            if (oy < 0 || oy >= d.out_h) continue;
            const T* grow_out = g + oy * d.out_w + ix + d.pad - (d.kernel - 1);
            for (std::int64_t kx = 0; kx < d.kernel; ++kx)
              V<T>::accumulate_row(grow_out + (d.kernel - 1 - kx),
                                   static_cast<double>(wc[ky * d.kernel + kx]), a0, a1);
          }
          V<T>::store(grow + ix, a0, a1);
        }
        for (; ix < d.in_w; ++ix) scalar_at(ix);
      }
    }
  }
}

template <class T>
void dwconv_bwd_data_t(const T* gy, const T* w, T* gx, const ConvDims& d) {
  if (d.stride == 1 && d.in_w >= static_cast<std::int64_t>(V<T>::width))
    dwconv_bwd_data_s1(gy, w, gx, d);
  else
    scalar::dwconv_bwd_data(gy, w, gx, d);
}

double dot_dispatch(const float* a, const float* b, std::size_t n) { return dot_f(a, b, n); }
double dot_dispatch(const double* a, const double* b, std::size_t n) { return dot_d(a, b, n); }

template <class T>
void dwconv_bwd_weight_t(const T* gy, const T* x, T* gw, const ConvDims& d) {
  if (d.stride != 1) {
    scalar::dwconv_bwd_weight(gy, x, gw, d);
    return;
  }
  const std::int64_t hw_in = d.in_h * d.in_w, hw_out = d.out_h * d.out_w;
  for (std::int64_t c = 0; c < d.channels; ++c) {
    T* wc = gw + c * d.kernel * d.kernel;
    for (std::int64_t ky = 0; ky < d.kernel; ++ky) {
      for (std::int64_t kx = 0; kx < d.kernel; ++kx) {
        double acc = 0.0;
        const std::int64_t lo = std::max<std::int64_t>(0, d.pad - kx);
        const std::int64_t hi = std::min<std::int64_t>(d.out_w, d.in_w - kx + d.pad);
        if (hi <= lo) continue;
        for (std::int64_t n = 0; n < d.batch; ++n) {
          const T* g = gy + (n * d.channels + c) * hw_out;
          const T* xin = x + (n * d.channels + c) * hw_in;
          for (std::int64_t oy = 0; oy < d.out_h; ++oy) {
            const std::int64_t iy = oy + ky - d.pad;
            if (iy < 0 || iy >= d.in_h) continue;
            acc += dot_dispatch(g + oy * d.out_w + lo, xin + iy * d.in_w + lo + kx - d.pad,
                                static_cast<std::size_t>(hi - lo));
          }
        }
        wc[ky * d.kernel + kx] =
            static_cast<T>(static_cast<double>(wc[ky * d.kernel + kx]) + acc);
      }
    }
  }
}

}  // namespace

OpsTable<float> make_table_f() {
  OpsTable<float> t;
  t.add = &add_f;
  t.sub = &sub_f;
  t.mul = &mul_f;
  t.div = &div_f;
  t.axpy = &axpy_f;
  t.muladd = &muladd_f;
  t.add_scalar = &add_scalar_f;
  t.scale = &scale_f;
  t.sum = &sum_f;
  t.dot = &dot_f;
  t.sq_dev_sum = &sq_dev_sum_f;
  t.gemm_nn = &gemm_nn_f;
  t.dwconv_fwd = &dwconv_fwd_t<float>;
  t.dwconv_bwd_data = &dwconv_bwd_data_t<float>;
  t.dwconv_bwd_weight = &dwconv_bwd_weight_t<float>;
  t.normalize_affine = &normalize_affine_f;
  return t;
}

OpsTable<double> make_table_d() {
  OpsTable<double> t;
  t.add = &add_d;
  t.sub = &sub_d;
  t.mul = &mul_d;
  t.div = &div_d;
  t.axpy = &axpy_d;
  t.muladd = &muladd_d;
  t.add_scalar = &add_scalar_d;
  t.scale = &scale_d;
  t.sum = &sum_d;
  t.dot = &dot_d;
  t.sq_dev_sum = &sq_dev_sum_d;
  t.gemm_nn = &gemm_nn_d;
  t.dwconv_fwd = &dwconv_fwd_t<double>;
  t.dwconv_bwd_data = &dwconv_bwd_data_t<double>;
  t.dwconv_bwd_weight = &dwconv_bwd_weight_t<double>;
  t.normalize_affine = &normalize_affine_d;
  return t;
}

}  // namespace simam::kern::avx2
