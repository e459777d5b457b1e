#pragma once

#include <cmath>
#include <cstddef>

#include "simam/kernels.hpp"
#include "simam/tensor.hpp"

namespace simam {

template <class T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a.shape, b.shape, "add");
  Tensor4<T> out(a.shape);
  kern::ops<T>().add(a.ptr(), b.ptr(), out.ptr(), a.data.size());
  return out;
}

template <class T>
Tensor4<T> sub(const Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a.shape, b.shape, "sub");
  Tensor4<T> out(a.shape);
  kern::ops<T>().sub(a.ptr(), b.ptr(), out.ptr(), a.data.size());
  return out;
}

template <class T>
Tensor4<T> mul(const Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a.shape, b.shape, "mul");
  Tensor4<T> out(a.shape);
  kern::ops<T>().mul(a.ptr(), b.ptr(), out.ptr(), a.data.size());
  return out;
}

template <class T>
Tensor4<T> div(const Tensor4<T>& a, const Tensor4<T>& b) {
  check_same_shape(a.shape, b.shape, "div");
  Tensor4<T> out(a.shape);
  kern::ops<T>().div(a.ptr(), b.ptr(), out.ptr(), a.data.size());
  return out;
}

template <class T>
Tensor4<T> add_scalar(const Tensor4<T>& a, T s) {
  Tensor4<T> out = a;
  kern::ops<T>().add_scalar(s, out.ptr(), out.data.size());
  return out;
}

template <class T>
Tensor4<T> mul_scalar(const Tensor4<T>& a, T s) {
  Tensor4<T> out = a;
  kern::ops<T>().scale(s, out.ptr(), out.data.size());
  return out;
}

template <class T>
T sigmoid_scalar(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <class T>
Tensor4<T> sigmoid(const Tensor4<T>& a) {
  Tensor4<T> out(a.shape);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = sigmoid_scalar(a.data[i]);
  return out;
}

template <class T>
Tensor4<T> silu(const Tensor4<T>& a) {
  Tensor4<T> out(a.shape);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * sigmoid_scalar(a.data[i]);
  return out;
}

template <class T>
Tensor4<T> relu(const Tensor4<T>& a) {
  Tensor4<T> out(a.shape);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] > T(0) ? a.data[i] : T(0);
  return out;
}

template <class T>
double sum(const Tensor4<T>& a) {
  return kern::ops<T>().sum(a.ptr(), a.data.size());
}

/// Per-(batch,channel) mean and biased variance (divisor M = H*W).
template <class T>
struct ChannelStats {
  Tensor4<T> mean;  // (N,C,1,1)
  Tensor4<T> var;   // (N,C,1,1)
};

template <class T>
ChannelStats<T> channel_moments(const Tensor4<T>& x) {
  if (x.shape.spatial() < 1)
    throw std::invalid_argument("channel_moments: empty spatial extent " + x.shape.str());
  const auto& k = kern::ops<T>();
  ChannelStats<T> s{Tensor4<T>(x.shape.n, x.shape.c, 1, 1), Tensor4<T>(x.shape.n, x.shape.c, 1, 1)};
  const std::size_t m = static_cast<std::size_t>(x.shape.spatial());
  for (std::int64_t n = 0; n < x.shape.n; ++n) {
    for (std::int64_t c = 0; c < x.shape.c; ++c) {
      const T* p = x.channel_ptr(n, c);
      const double mean = k.sum(p, m) / static_cast<double>(m);
      const double var = k.sq_dev_sum(p, mean, m) / static_cast<double>(m);
      s.mean.at(n, c, 0, 0) = static_cast<T>(mean);
      s.var.at(n, c, 0, 0) = static_cast<T>(var);
    }
  }
  return s;
}

/// (N,C,1,1) -> (N,C,H,W) explicit broadcast.
template <class T>
Tensor4<T> expand_spatial(const Tensor4<T>& x, std::int64_t h, std::int64_t w) {
  if (x.shape.h != 1 || x.shape.w != 1)
    throw std::invalid_argument("expand_spatial: source must be (N,C,1,1), got " + x.shape.str());
  Tensor4<T> out(x.shape.n, x.shape.c, h, w);
  const std::size_t hw = static_cast<std::size_t>(h * w);
  for (std::int64_t n = 0; n < x.shape.n; ++n)
    for (std::int64_t c = 0; c < x.shape.c; ++c) {
      T* dst = out.channel_ptr(n, c);
      const T v = x.at(n, c, 0, 0);
      for (std::size_t i = 0; i < hw; ++i) dst[i] = v;
    }
  return out;
}

/// Mean over H,W -> (N,C,1,1). Also the global average pool.
template <class T>
Tensor4<T> mean_spatial(const Tensor4<T>& x) {
  Tensor4<T> out(x.shape.n, x.shape.c, 1, 1);
  const auto& k = kern::ops<T>();
  const std::size_t m = static_cast<std::size_t>(x.shape.spatial());
  for (std::int64_t n = 0; n < x.shape.n; ++n)
    for (std::int64_t c = 0; c < x.shape.c; ++c)
      out.at(n, c, 0, 0) = static_cast<T>(k.sum(x.channel_ptr(n, c), m) / static_cast<double>(m));
  return out;
}

/// B[cols x rows] = transpose of A[rows x cols].
template <class T>
void transpose(const T* a, T* b, std::size_t rows, std::size_t cols) {
  constexpr std::size_t blk = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += blk)
    for (std::size_t j0 = 0; j0 < cols; j0 += blk) {
      const std::size_t imax = std::min(rows, i0 + blk), jmax = std::min(cols, j0 + blk);
      for (std::size_t i = i0; i < imax; ++i)
        for (std::size_t j = j0; j < jmax; ++j) b[j * rows + i] = a[i * cols + j];
    }
}

}  // namespace simam
