#pragma once

// Vector kernels used on hot paths (Sobolev norms, Taylor propagation of
// state vectors). Each has a scalar reference version and an AVX2+FMA
// version; the dispatcher picks one at first use. LIEEXP_FORCE_SCALAR=1 in
// the environment pins the scalar path.

#include <complex>
#include <cstddef>

namespace lieexp::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

struct Table {
  // sum conj(x_i) y_i
  cplx (*cdot)(const cplx* x, const cplx* y, std::size_t n);
  // y += a x
  void (*caxpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
  // sum w_i |x_i|^2
  double (*weighted_norm2)(const double* w, const cplx* x, std::size_t n);
  // y = A x, A column-major rows x cols
  void (*gemv)(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
};

namespace scalar {
cplx cdot(const cplx* x, const cplx* y, std::size_t n);
void caxpy(cplx a, const cplx* x, cplx* y, std::size_t n);
double weighted_norm2(const double* w, const cplx* x, std::size_t n);
void gemv(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
}  // namespace scalar

#ifdef LIEEXP_HAVE_AVX2
namespace avx2 {
cplx cdot(const cplx* x, const cplx* y, std::size_t n);
void caxpy(cplx a, const cplx* x, cplx* y, std::size_t n);
double weighted_norm2(const double* w, const cplx* x, std::size_t n);
void gemv(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
}  // namespace avx2
#endif

/// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available();
Isa active_isa();
const Table& table(Isa isa);
const Table& active();

inline cplx cdot(const cplx* x, const cplx* y, std::size_t n) { return active().cdot(x, y, n); }
inline void caxpy(cplx a, const cplx* x, cplx* y, std::size_t n) { active().caxpy(a, x, y, n); }
inline double weighted_norm2(const double* w, const cplx* x, std::size_t n) {
  return active().weighted_norm2(w, x, n);
}
inline void gemv(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  active().gemv(a, rows, cols, x, y);
}

}  // namespace lieexp::kernels
