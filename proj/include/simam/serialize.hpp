#pragma once

// Tensor container format: "TEN4" magic, u32 dtype code (1=f32, 2=f64),
// then N,C,H,W as u32, all little-endian, followed by raw IEEE-754 data.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "simam/tensor.hpp"

namespace simam {

template <class T>
struct dtype_code;
template <>
struct dtype_code<float> {
  static constexpr std::uint32_t value = 1;
};
template <>
struct dtype_code<double> {
  static constexpr std::uint32_t value = 2;
};

namespace detail {
inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
inline std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("tensor read: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace detail

template <class T>
void save_tensor(std::ostream& os, const Tensor4<T>& t) {
  static_assert(std::endian::native == std::endian::little,
                "tensor serialization assumes a little-endian host");
  os.write("TEN4", 4);
  detail::write_u32(os, dtype_code<T>::value);
  detail::write_u32(os, static_cast<std::uint32_t>(t.shape.n));
  detail::write_u32(os, static_cast<std::uint32_t>(t.shape.c));
  detail::write_u32(os, static_cast<std::uint32_t>(t.shape.h));
  detail::write_u32(os, static_cast<std::uint32_t>(t.shape.w));
  os.write(reinterpret_cast<const char*>(t.ptr()),
           static_cast<std::streamsize>(t.data.size() * sizeof(T)));
  if (!os) throw std::runtime_error("tensor write failed");
}

/// Reads the header and returns (dtype, shape) without consuming the data.
inline std::pair<std::uint32_t, Shape4> peek_tensor_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "TEN4", 4) != 0)
    throw std::runtime_error("tensor read: bad magic");
  const std::uint32_t dtype = detail::read_u32(is);
  Shape4 s;
  s.n = detail::read_u32(is);
  s.c = detail::read_u32(is);
  s.h = detail::read_u32(is);
  s.w = detail::read_u32(is);
  return {dtype, s};
}

template <class T>
Tensor4<T> load_tensor(std::istream& is) {
  auto [dtype, shape] = peek_tensor_header(is);
  if (dtype != dtype_code<T>::value)
    throw std::runtime_error("tensor read: dtype code " + std::to_string(dtype) +
                             " does not match requested element type");
  Tensor4<T> t(shape);
  is.read(reinterpret_cast<char*>(t.ptr()),
          static_cast<std::streamsize>(t.data.size() * sizeof(T)));
  if (!is) throw std::runtime_error("tensor read: truncated data");
  return t;
}

}  // namespace simam
