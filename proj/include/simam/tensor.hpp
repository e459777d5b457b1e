#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace simam {

struct Shape4 {
  std::int64_t n = 0, c = 0, h = 0, w = 0;

  std::int64_t numel() const { return n * c * h * w; }
  std::int64_t spatial() const { return h * w; }
  bool operator==(const Shape4&) const = default;

  std::string str() const {
    std::ostringstream os;
    os << "(" << n << "," << c << "," << h << "," << w << ")";
    return os.str();
  }
};

/// Dense NCHW array. Entries are contiguous, row-major within a channel.
template <class T>
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w, T fill = T(0))
      : shape{n, c, h, w}, data(static_cast<std::size_t>(n * c * h * w), fill) {
    if (n < 0 || c < 0 || h < 0 || w < 0)
      throw std::invalid_argument("Tensor4: negative dimension in " + shape.str());
  }
  explicit Tensor4(Shape4 s, T fill = T(0)) : Tensor4(s.n, s.c, s.h, s.w, fill) {}

  static Tensor4 zeros(Shape4 s) { return Tensor4(s, T(0)); }
  static Tensor4 ones(Shape4 s) { return Tensor4(s, T(1)); }
  static Tensor4 full(Shape4 s, T v) { return Tensor4(s, v); }
  static Tensor4 scalar(T v) { return Tensor4(Shape4{1, 1, 1, 1}, v); }

  std::int64_t numel() const { return shape.numel(); }
  bool empty() const { return data.empty(); }
  bool is_scalar() const { return shape.numel() == 1; }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data[static_cast<std::size_t>(((n * shape.c + c) * shape.h + h) * shape.w + w)];
  }
  T at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data[static_cast<std::size_t>(((n * shape.c + c) * shape.h + h) * shape.w + w)];
  }

  T* channel_ptr(std::int64_t n, std::int64_t c) {
    return data.data() + static_cast<std::size_t>((n * shape.c + c) * shape.spatial());
  }
  const T* channel_ptr(std::int64_t n, std::int64_t c) const {
    return data.data() + static_cast<std::size_t>((n * shape.c + c) * shape.spatial());
  }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  Shape4 shape{};
  std::vector<T> data;
  bool requires_grad = false;
};

inline void check_same_shape(const Shape4& a, const Shape4& b, const char* op) {
  if (!(a == b))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.str() + " vs " + b.str());
}

}  // namespace simam
