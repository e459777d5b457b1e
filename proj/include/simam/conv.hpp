#pragma once

#include <optional>
#include <vector>

#include "simam/ops.hpp"

namespace simam {

struct ConvSpec {
  std::int64_t stride = 1;
  std::int64_t pad = 0;
  std::int64_t groups = 1;
};

inline std::int64_t conv_out_extent(std::int64_t in, std::int64_t k, std::int64_t pad,
                                    std::int64_t stride) {
  return (in + 2 * pad - k) / stride + 1;
}

/// Weight layout: (C_out, C_in/groups, k, k). Only groups == 1 and the
/// depthwise case groups == C_in == C_out are supported.
template <class T>
Shape4 conv2d_check(const Shape4& x, const Shape4& w, const ConvSpec& s) {
  if (w.h != w.w) throw std::invalid_argument("conv2d: kernel must be square, got " + w.str());
  if (s.stride < 1 || s.pad < 0 || s.groups < 1)
    throw std::invalid_argument("conv2d: bad stride/pad/groups");
  if (x.c != w.c * s.groups)
    throw std::invalid_argument("conv2d: channel/group mismatch: input " + x.str() + ", weight " +
                                w.str() + ", groups " + std::to_string(s.groups));
  if (w.n % s.groups != 0)
    throw std::invalid_argument("conv2d: out channels not divisible by groups");
  if (s.groups != 1 && !(s.groups == x.c && w.n == x.c))
    throw std::invalid_argument("conv2d: only groups=1 or depthwise groups=C supported, groups=" +
                                std::to_string(s.groups));
  const std::int64_t oh = conv_out_extent(x.h, w.h, s.pad, s.stride);
  const std::int64_t ow = conv_out_extent(x.w, w.w, s.pad, s.stride);
  if (oh < 1 || ow < 1)
    throw std::invalid_argument("conv2d: empty output for input " + x.str());
  return Shape4{x.n, w.n, oh, ow};
}

namespace detail {

/// col[(C_in*k*k) x (Ho*Wo)] for one sample, rows ordered (c,ky,kx).
template <class T>
void im2col(const T* x, std::int64_t c_in, std::int64_t h, std::int64_t w, std::int64_t k,
            std::int64_t stride, std::int64_t pad, std::int64_t oh, std::int64_t ow, T* col) {
  const std::int64_t ohw = oh * ow;
  for (std::int64_t c = 0; c < c_in; ++c) {
    const T* xc = x + c * h * w;
    for (std::int64_t ky = 0; ky < k; ++ky) {
      for (std::int64_t kx = 0; kx < k; ++kx) {
        T* row = col + ((c * k + ky) * k + kx) * ohw;
        for (std::int64_t oy = 0; oy < oh; ++oy) {
          const std::int64_t iy = oy * stride + ky - pad;
          T* dst = row + oy * ow;
          if (iy < 0 || iy >= h) {
            for (std::int64_t ox = 0; ox < ow; ++ox) dst[ox] = T(0);
            continue;
          }
          const T* src = xc + iy * w;
          for (std::int64_t ox = 0; ox < ow; ++ox) {
            const std::int64_t ix = ox * stride + kx - pad;
            dst[ox] = (ix < 0 || ix >= w) ? T(0) : src[ix];
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const T* col, std::int64_t c_in, std::int64_t h, std::int64_t w, std::int64_t k,
                std::int64_t stride, std::int64_t pad, std::int64_t oh, std::int64_t ow, T* x) {
  const std::int64_t ohw = oh * ow;
  for (std::int64_t c = 0; c < c_in; ++c) {
    T* xc = x + c * h * w;
    for (std::int64_t ky = 0; ky < k; ++ky) {
      for (std::int64_t kx = 0; kx < k; ++kx) {
        const T* row = col + ((c * k + ky) * k + kx) * ohw;
        for (std::int64_t oy = 0; oy < oh; ++oy) {
          const std::int64_t iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          const T* src = row + oy * ow;
          T* dst = xc + iy * w;
          for (std::int64_t ox = 0; ox < ow; ++ox) {
            const std::int64_t ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

inline kern::ConvDims dw_dims(const Shape4& x, std::int64_t k, const ConvSpec& s, const Shape4& y) {
  return kern::ConvDims{x.n, x.c, x.h, x.w, k, s.stride, s.pad, y.h, y.w};
}

}  // namespace detail

template <class T>
Tensor4<T> conv2d(const Tensor4<T>& x, const Tensor4<T>& w, const Tensor4<T>* bias,
                  const ConvSpec& s) {
  const Shape4 ys = conv2d_check<T>(x.shape, w.shape, s);
  Tensor4<T> y(ys);
  const auto& k = kern::ops<T>();
  const bool depthwise = s.groups != 1;
  const std::int64_t ohw = ys.h * ys.w;

  if (depthwise) {
    k.dwconv_fwd(x.ptr(), w.ptr(), y.ptr(), detail::dw_dims(x.shape, w.h, s, ys));
  } else if (w.h == 1 && s.stride == 1 && s.pad == 0) {
    // pointwise: y[n] = W[CoutxCin] · x[n][CinxHW]
    for (std::int64_t n = 0; n < x.shape.n; ++n)
      k.gemm_nn(w.ptr(), x.channel_ptr(n, 0), y.channel_ptr(n, 0),
                static_cast<std::size_t>(ys.c), static_cast<std::size_t>(ohw),
                static_cast<std::size_t>(x.shape.c), false);
  } else {
    const std::int64_t kk = x.shape.c * w.h * w.w;
    std::vector<T> col(static_cast<std::size_t>(kk * ohw));
    for (std::int64_t n = 0; n < x.shape.n; ++n) {
      detail::im2col(x.channel_ptr(n, 0), x.shape.c, x.shape.h, x.shape.w, w.h, s.stride, s.pad,
                     ys.h, ys.w, col.data());
      k.gemm_nn(w.ptr(), col.data(), y.channel_ptr(n, 0), static_cast<std::size_t>(ys.c),
                static_cast<std::size_t>(ohw), static_cast<std::size_t>(kk), false);
    }
  }

  if (bias) {
    if (bias->shape.c != ys.c || bias->numel() != ys.c)
      throw std::invalid_argument("conv2d: bias shape " + bias->shape.str() +
                                  " does not match out channels");
    for (std::int64_t n = 0; n < ys.n; ++n)
      for (std::int64_t c = 0; c < ys.c; ++c)
        k.add_scalar(bias->data[static_cast<std::size_t>(c)], y.channel_ptr(n, c),
                     static_cast<std::size_t>(ohw));
  }
  return y;
}

/// Gradients of conv2d. Any of the outputs may be null to skip.
template <class T>
void conv2d_backward(const Tensor4<T>& x, const Tensor4<T>& w, const ConvSpec& s,
                     const Tensor4<T>& gy, Tensor4<T>* gx, Tensor4<T>* gw, Tensor4<T>* gb) {
  const Shape4 ys = conv2d_check<T>(x.shape, w.shape, s);
  check_same_shape(gy.shape, ys, "conv2d_backward");
  const auto& k = kern::ops<T>();
  const std::int64_t ohw = ys.h * ys.w;
  const bool depthwise = s.groups != 1;

  if (gb) {
    for (std::int64_t c = 0; c < ys.c; ++c) {
      double acc = static_cast<double>(gb->data[static_cast<std::size_t>(c)]);
      for (std::int64_t n = 0; n < ys.n; ++n)
        acc += k.sum(gy.channel_ptr(n, c), static_cast<std::size_t>(ohw));
      gb->data[static_cast<std::size_t>(c)] = static_cast<T>(acc);
    }
  }

  if (depthwise) {
    const auto d = detail::dw_dims(x.shape, w.h, s, ys);
    if (gx) k.dwconv_bwd_data(gy.ptr(), w.ptr(), gx->ptr(), d);
    if (gw) k.dwconv_bwd_weight(gy.ptr(), x.ptr(), gw->ptr(), d);
    return;
  }

  const bool pointwise = (w.h == 1 && s.stride == 1 && s.pad == 0);
  const std::int64_t kk = x.shape.c * w.h * w.w;
  const std::size_t m = static_cast<std::size_t>(ys.c), nn = static_cast<std::size_t>(ohw),
                    kd = static_cast<std::size_t>(kk);

  std::vector<T> wt;
  if (gx) {
    wt.resize(static_cast<std::size_t>(kk * ys.c));
    transpose(w.ptr(), wt.data(), m, kd);
  }
  std::vector<T> col, colt, dcol;
  if (!pointwise) col.resize(static_cast<std::size_t>(kk * ohw));
  if (gw) colt.resize(static_cast<std::size_t>(kk * ohw));
  if (gx && !pointwise) dcol.resize(static_cast<std::size_t>(kk * ohw));

  for (std::int64_t n = 0; n < x.shape.n; ++n) {
    const T* colp;
    if (pointwise) {
      colp = x.channel_ptr(n, 0);
    } else {
      detail::im2col(x.channel_ptr(n, 0), x.shape.c, x.shape.h, x.shape.w, w.h, s.stride, s.pad,
                     ys.h, ys.w, col.data());
      colp = col.data();
    }
    if (gw) {
      transpose(colp, colt.data(), kd, nn);
      k.gemm_nn(gy.channel_ptr(n, 0), colt.data(), gw->ptr(), m, kd, nn, true);
    }
    if (gx) {
      if (pointwise) {
        // dX[n] += W^T · dY[n], accumulate directly
        k.gemm_nn(wt.data(), gy.channel_ptr(n, 0), gx->channel_ptr(n, 0), kd, nn, m, true);
      } else {
        k.gemm_nn(wt.data(), gy.channel_ptr(n, 0), dcol.data(), kd, nn, m, false);
        detail::col2im_add(dcol.data(), x.shape.c, x.shape.h, x.shape.w, w.h, s.stride, s.pad,
                           ys.h, ys.w, gx->channel_ptr(n, 0));
      }
    }
  }
}

}  // namespace simam
