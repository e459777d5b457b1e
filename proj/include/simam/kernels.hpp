#pragma once

#include <cstddef>
#include <cstdint>

namespace simam::kern {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

/// True when the host CPU (and this build) can run the AVX2 kernels.
bool avx2_supported();

/// Currently selected kernel set. Chosen once at startup: AVX2 when the CPU
/// supports it, scalar otherwise. The SIMAM_KERNELS environment variable
/// ("scalar" or "avx2") overrides the automatic choice.
Isa active_isa();

/// Force a kernel set. Throws std::runtime_error if the requested set cannot
/// run on this host. Intended for tests and benchmarks.
void set_isa(Isa isa);

/// Geometry of a depthwise convolution (weight layout C x k x k).
struct ConvDims {
  std::int64_t batch, channels, in_h, in_w;
  std::int64_t kernel, stride, pad;
  std::int64_t out_h, out_w;
};

/// One function pointer per inner-loop kernel. Every entry has a scalar
/// reference implementation; hot entries additionally have an AVX2 variant.
/// All reductions accumulate in double regardless of T.
template <class T>
struct OpsTable {
  void (*add)(const T*, const T*, T*, std::size_t);
  void (*sub)(const T*, const T*, T*, std::size_t);
  void (*mul)(const T*, const T*, T*, std::size_t);
  void (*div)(const T*, const T*, T*, std::size_t);
  void (*axpy)(T, const T*, T*, std::size_t);            // y += a*x
  void (*muladd)(const T*, const T*, T*, std::size_t);   // acc += a⊙b
  void (*add_scalar)(T, T*, std::size_t);                // x += s
  void (*scale)(T, T*, std::size_t);                     // x *= s
  double (*sum)(const T*, std::size_t);
  double (*dot)(const T*, const T*, std::size_t);
  double (*sq_dev_sum)(const T*, double, std::size_t);   // Σ (x-mu)²
  // C[MxN] (+)= A[MxK]·B[KxN], row-major.
  void (*gemm_nn)(const T*, const T*, T*, std::size_t, std::size_t, std::size_t, bool);
  void (*dwconv_fwd)(const T*, const T*, T*, const ConvDims&);
  void (*dwconv_bwd_data)(const T*, const T*, T*, const ConvDims&);    // gx += ...
  void (*dwconv_bwd_weight)(const T*, const T*, T*, const ConvDims&);  // gw += ...
  // y = gamma*(x-mu)*inv_sigma + beta over a contiguous run
  void (*normalize_affine)(const T*, T*, std::size_t, T, T, T, T);
};

/// Active kernel table for T (float or double).
template <class T>
const OpsTable<T>& ops();

/// Kernel table for a specific instruction set; used by equivalence tests.
template <class T>
const OpsTable<T>& ops_for(Isa isa);

}  // namespace simam::kern
