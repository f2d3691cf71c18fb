#include <cstdlib>
#include <stdexcept>
#include <string>

#include "r4/kernels.hpp"

namespace r4 {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool neon_available() { return neon_kernels_or_null() != nullptr; }

namespace {

const Kernels* resolve(const std::string& name) {
  if (name == "scalar") return &scalar_kernels();
  if (name == "avx2") {
    if (!avx2_available()) throw std::runtime_error("kernel backend avx2 not supported on this CPU");
    return avx2_kernels_or_null();
  }
  if (name == "neon") {
    const Kernels* k = neon_kernels_or_null();
    if (!k) throw std::runtime_error("kernel backend neon not supported on this CPU");
    return k;
  }
  throw std::runtime_error("unknown kernel backend: " + name);
}

const Kernels* pick_default() {
  if (const char* env = std::getenv("R4_KERNELS")) return resolve(env);
  if (avx2_available()) return avx2_kernels_or_null();
  if (const Kernels* k = neon_kernels_or_null()) return k;
  return &scalar_kernels();
}

const Kernels*& active() {
  static const Kernels* k = pick_default();
  return k;
}

}  // namespace

const Kernels& kernels() { return *active(); }

void set_kernel_backend(const std::string& name) { active() = resolve(name); }

}  // namespace r4
