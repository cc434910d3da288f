#include <cstdlib>
#include <cstring>

#include "hsims/simd.hpp"

namespace hsims::simd {

#ifdef HSIMS_BUILD_AVX2
const Kernels* avx2_kernels_impl();
#endif

const Kernels* avx2_kernels() {
#ifdef HSIMS_BUILD_AVX2
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return avx2_kernels_impl();
#endif
  return nullptr;
}

namespace {

const Kernels& pick() {
  const char* force = std::getenv("HSIMS_SIMD");
  if (force && std::strcmp(force, "scalar") == 0) return scalar_kernels();
  const Kernels* v = avx2_kernels();
  if (force && std::strcmp(force, "avx2") == 0)
    return v ? *v : scalar_kernels();
  return v ? *v : scalar_kernels();
}

}  // namespace

const Kernels& active() {
  static const Kernels& k = pick();
  return k;
}

}  // namespace hsims::simd
