#include "simam/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "kernels_scalar.hpp"
#ifdef SIMAM_WITH_AVX2
#include "kernels_avx2.hpp"
#endif

namespace simam::kern {
namespace {

bool cpu_has_avx2() {
#if defined(SIMAM_WITH_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect_isa() {
  if (const char* env = std::getenv("SIMAM_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_has_avx2())
        throw std::runtime_error("SIMAM_KERNELS=avx2 requested but AVX2 is unavailable");
      return Isa::avx2;
    }
    throw std::runtime_error(std::string("unknown SIMAM_KERNELS value: ") + env);
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& isa_state() {
  static std::atomic<Isa> state{detect_isa()};
  return state;
}

const OpsTable<float> kScalarF = scalar::make_table<float>();
const OpsTable<double> kScalarD = scalar::make_table<double>();
#ifdef SIMAM_WITH_AVX2
const OpsTable<float> kAvx2F = avx2::make_table_f();
const OpsTable<double> kAvx2D = avx2::make_table_d();
#endif

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_supported() { return cpu_has_avx2(); }

Isa active_isa() { return isa_state().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2())
    throw std::runtime_error("set_isa: AVX2 kernels unavailable on this host");
  isa_state().store(isa, std::memory_order_relaxed);
}

template <>
const OpsTable<float>& ops_for<float>(Isa isa) {
#ifdef SIMAM_WITH_AVX2
  if (isa == Isa::avx2) return kAvx2F;
#else
  if (isa == Isa::avx2) throw std::runtime_error("AVX2 kernels not built");
#endif
  return kScalarF;
}

template <>
const OpsTable<double>& ops_for<double>(Isa isa) {
#ifdef SIMAM_WITH_AVX2
  if (isa == Isa::avx2) return kAvx2D;
#else
  if (isa == Isa::avx2) throw std::runtime_error("AVX2 kernels not built");
#endif
  return kScalarD;
}

template <>
const OpsTable<float>& ops<float>() {
  return ops_for<float>(active_isa());
}

template <>
const OpsTable<double>& ops<double>() {
  return ops_for<double>(active_isa());
}

}  // namespace simam::kern
