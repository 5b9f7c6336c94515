// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.

#include <immintrin.h>

#include "lieexp/kernels.hpp"

namespace lieexp::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

cplx cdot(const cplx* x, const cplx* y, std::size_t n) {
  const auto* xp = reinterpret_cast<const double*>(x);
  const auto* yp = reinterpret_cast<const double*>(y);
  // acc_r lanes: xr*yr, xi*yi; acc_i lanes: xr*yi, xi*yr
  __m256d acc_r = _mm256_setzero_pd();
  __m256d acc_i = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    __m256d yv = _mm256_loadu_pd(yp + 2 * i);
    acc_r = _mm256_fmadd_pd(xv, yv, acc_r);
    acc_i = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0b0101), acc_i);
  }
  const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
  double re = hsum(acc_r);
  double im = hsum(_mm256_mul_pd(acc_i, sign));
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

void caxpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const auto* xp = reinterpret_cast<const double*>(x);
  auto* yp = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    __m256d xs = _mm256_permute_pd(xv, 0b0101);
    // even lanes ar*xr - ai*xi, odd lanes ar*xi + ai*xr
    __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, xs));
    _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yp + 2 * i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double weighted_norm2(const double* w, const cplx* x, std::size_t n) {
  const auto* xp = reinterpret_cast<const double*>(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    __m256d wv = _mm256_set_pd(w[i + 1], w[i + 1], w[i], w[i]);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(xv, xv), wv, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * std::norm(x[i]);
  return s;
}

void gemv(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = 0;
  for (std::size_t c = 0; c < cols; ++c)
    if (x[c] != cplx{}) caxpy(x[c], a + c * rows, y, rows);
}

}  // namespace lieexp::kernels::avx2
