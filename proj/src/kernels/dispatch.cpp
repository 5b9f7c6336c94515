#include <cstdlib>
#include <cstring>

#include "lieexp/kernels.hpp"

namespace lieexp::kernels {

namespace {

constexpr Table kScalar{&scalar::cdot, &scalar::caxpy, &scalar::weighted_norm2, &scalar::gemv};
#ifdef LIEEXP_HAVE_AVX2
constexpr Table kAvx2{&avx2::cdot, &avx2::caxpy, &avx2::weighted_norm2, &avx2::gemv};
#endif

Isa detect() {
  const char* force = std::getenv("LIEEXP_FORCE_SCALAR");
  if (force != nullptr && std::strcmp(force, "0") != 0 && *force != '\0') return Isa::Scalar;
  return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

bool avx2_available() {
#if defined(LIEEXP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

const Table& table(Isa isa) {
#ifdef LIEEXP_HAVE_AVX2
  if (isa == Isa::Avx2 && avx2_available()) return kAvx2;
#endif
  (void)isa;
  return kScalar;
}

const Table& active() {
  static const Table& t = table(active_isa());
  return t;
}

}  // namespace lieexp::kernels
