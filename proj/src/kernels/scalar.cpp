#include "lieexp/kernels.hpp"

namespace lieexp::kernels::scalar {

cplx cdot(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0, im = 0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

void caxpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double weighted_norm2(const double* w, const cplx* x, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::norm(x[i]);
  return acc;
}

void gemv(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = 0;
  for (std::size_t c = 0; c < cols; ++c)
    if (x[c] != cplx{}) caxpy(x[c], a + c * rows, y, rows);
}

}  // namespace lieexp::kernels::scalar
