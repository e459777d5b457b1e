#pragma once

// Scalar reference kernels. These define the semantics; the AVX2 variants
// must match them within rounding tolerance (see tests/test_kernels.cpp).

#include <algorithm>
#include <cstddef>
#include <vector>

#include "simam/kernels.hpp"

namespace simam::kern::scalar {

template <class T>
void add(const T* a, const T* b, T* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
}

template <class T>
void sub(const T* a, const T* b, T* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] = a[i] - b[i];
}

template <class T>
void mul(const T* a, const T* b, T* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] = a[i] * b[i];
}

template <class T>
void div(const T* a, const T* b, T* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) c[i] = a[i] / b[i];
}

template <class T>
void axpy(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <class T>
void muladd(const T* a, const T* b, T* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}

template <class T>
void add_scalar(T s, T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] += s;
}

template <class T>
void scale(T s, T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

template <class T>
double sum(const T* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(x[i]);
  return s;
}

template <class T>
double dot(const T* a, const T* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

template <class T>
double sq_dev_sum(const T* x, double mu, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = static_cast<double>(x[i]) - mu;
    s += d * d;
  }
  return s;
}

template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k,
             bool accumulate) {
  thread_local std::vector<double> row;
  row.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = static_cast<double>(a[i * k + p]);
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * static_cast<double>(brow[j]);
    }
    T* crow = c + i * n;
    if (accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = static_cast<T>(static_cast<double>(crow[j]) + row[j]);
    } else {
      for (std::size_t j = 0; j < n; ++j) crow[j] = static_cast<T>(row[j]);
    }
  }
}

template <class T>
void dwconv_fwd(const T* x, const T* w, T* y, const ConvDims& d) {
  const std::int64_t hw_in = d.in_h * d.in_w, hw_out = d.out_h * d.out_w;
  for (std::int64_t n = 0; n < d.batch; ++n) {
    for (std::int64_t c = 0; c < d.channels; ++c) {
      const T* xin = x + (n * d.channels + c) * hw_in;
      const T* wc = w + c * d.kernel * d.kernel;
      T* yout = y + (n * d.channels + c) * hw_out;
      for (std::int64_t oy = 0; oy < d.out_h; ++oy) {
        for (std::int64_t ox = 0; ox < d.out_w; ++ox) {
          double acc = 0.0;
          for (std::int64_t ky = 0; ky < d.kernel; ++ky) {
            const std::int64_t iy = oy * d.stride + ky - d.pad;
            if (iy < 0 || iy >= d.in_h) continue;
            for (std::int64_t kx = 0; kx < d.kernel; ++kx) {
              const std::int64_t ix = ox * d.stride + kx - d.pad;
              if (ix < 0 || ix >= d.in_w) continue;
              acc += static_cast<double>(xin[iy * d.in_w + ix]) *
                     static_cast<double>(wc[ky * d.kernel + kx]);
            }
          }
          yout[oy * d.out_w + ox] = static_cast<T>(acc);
        }
      }
    }
  }
}

template <class T>
void dwconv_bwd_data(const T* gy, const T* w, T* gx, const ConvDims& d) {
  const std::int64_t hw_in = d.in_h * d.in_w, hw_out = d.out_h * d.out_w;
  for (std::int64_t n = 0; n < d.batch; ++n) {
    for (std::int64_t c = 0; c < d.channels; ++c) {
      const T* g = gy + (n * d.channels + c) * hw_out;
      const T* wc = w + c * d.kernel * d.kernel;
      T* gin = gx + (n * d.channels + c) * hw_in;
      for (std::int64_t oy = 0; oy < d.out_h; ++oy) {
        for (std::int64_t ox = 0; ox < d.out_w; ++ox) {
          const T gv = g[oy * d.out_w + ox];
          for (std::int64_t ky = 0; ky < d.kernel; ++ky) {
            const std::int64_t iy = oy * d.stride + ky - d.pad;
            if (iy < 0 || iy >= d.in_h) continue;
            for (std::int64_t kx = 0; kx < d.kernel; ++kx) {
              const std::int64_t ix = ox * d.stride + kx - d.pad;
              if (ix < 0 || ix >= d.in_w) continue;
              gin[iy * d.in_w + ix] += gv * wc[ky * d.kernel + kx];
            }
          }
        }
      }
    }
  }
}

template <class T>
void dwconv_bwd_weight(const T* gy, const T* x, T* gw, const ConvDims& d) {
  const std::int64_t hw_in = d.in_h * d.in_w, hw_out = d.out_h * d.out_w;
  for (std::int64_t c = 0; c < d.channels; ++c) {
    T* wc = gw + c * d.kernel * d.kernel;
    for (std::int64_t ky = 0; ky < d.kernel; ++ky) {
      for (std::int64_t kx = 0; kx < d.kernel; ++kx) {
        double acc = 0.0;
        for (std::int64_t n = 0; n < d.batch; ++n) {
          const T* g = gy + (n * d.channels + c) * hw_out;
          const T* xin = x + (n * d.channels + c) * hw_in;
          for (std::int64_t oy = 0; oy < d.out_h; ++oy) {
            const std::int64_t iy = oy * d.stride + ky - d.pad;
            if (iy < 0 || iy >= d.in_h) continue;
            for (std::int64_t ox = 0; ox < d.out_w; ++ox) {
              const std::int64_t ix = ox * d.stride + kx - d.pad;
              if (ix < 0 || ix >= d.in_w) continue;
              acc += static_cast<double>(g[oy * d.out_w + ox]) *
                     static_cast<double>(xin[iy * d.in_w + ix]);
            }
          }
        }
        wc[ky * d.kernel + kx] = static_cast<T>(static_cast<double>(wc[ky * d.kernel + kx]) + acc);
      }
    }
  }
}

template <class T>
void normalize_affine(const T* x, T* y, std::size_t n, T mu, T inv_sigma, T gamma, T beta) {
  const T a = gamma * inv_sigma;
  const T b = beta - mu * a;
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b;
}

template <class T>
OpsTable<T> make_table() {
  OpsTable<T> t;
  t.add = &add<T>;
  t.sub = &sub<T>;
  t.mul = &mul<T>;
  t.div = &div<T>;
  t.axpy = &axpy<T>;
  t.muladd = &muladd<T>;
  t.add_scalar = &add_scalar<T>;
  t.scale = &scale<T>;
  t.sum = &sum<T>;
  t.dot = &dot<T>;
  t.sq_dev_sum = &sq_dev_sum<T>;
  t.gemm_nn = &gemm_nn<T>;
  t.dwconv_fwd = &dwconv_fwd<T>;
  t.dwconv_bwd_data = &dwconv_bwd_data<T>;
  t.dwconv_bwd_weight = &dwconv_bwd_weight<T>;
  t.normalize_affine = &normalize_affine<T>;
  return t;
}

}  // namespace simam::kern::scalar
