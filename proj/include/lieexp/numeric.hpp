#pragma once

// Scalar types shared by every module: double-precision complex numbers for
// the numerical side, exact rationals (and complex rationals) for the
// algebraic side.

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace lieexp {

using cplx = std::complex<double>;
using Rational = mpq_class;

inline constexpr cplx I_UNIT{0.0, 1.0};

/// p/q in canonical form (mpq_class(p, q) does not reduce on its own).
inline Rational frac(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

/// Complex number with exact rational parts.
struct QComplex {
  Rational re{0};
  Rational im{0};

  QComplex() = default;
  QComplex(Rational r) : re(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  QComplex(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  QComplex(long r) : re(r) {}  // NOLINT(google-explicit-constructor)

  static QComplex i() { return {Rational(0), Rational(1)}; }

  QComplex& operator+=(const QComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  QComplex& operator-=(const QComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  QComplex& operator*=(const QComplex& o) {
    Rational r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  friend QComplex operator+(QComplex a, const QComplex& b) { return a += b; }
  friend QComplex operator-(QComplex a, const QComplex& b) { return a -= b; }
  friend QComplex operator*(QComplex a, const QComplex& b) { return a *= b; }
  friend QComplex operator-(const QComplex& a) { return {-a.re, -a.im}; }
  friend QComplex operator/(const QComplex& a, const QComplex& b) {
    Rational d = b.re * b.re + b.im * b.im;
    if (d == 0) throw std::domain_error("QComplex division by zero");
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
  }
  friend bool operator==(const QComplex& a, const QComplex& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend bool operator!=(const QComplex& a, const QComplex& b) { return !(a == b); }

  [[nodiscard]] cplx to_cplx() const { return {re.get_d(), im.get_d()}; }
};

inline QComplex conj(const QComplex& z) { return {z.re, -z.im}; }

/// Per-scalar helpers so algebra templates work for both cplx and QComplex.
template <class T>
struct ScalarOps;

template <>
struct ScalarOps<cplx> {
  static cplx zero() { return {0.0, 0.0}; }
  static cplx one() { return {1.0, 0.0}; }
  static cplx i() { return I_UNIT; }
  static cplx from_int(long n) { return {static_cast<double>(n), 0.0}; }
  static cplx from_rational(const Rational& q) { return {q.get_d(), 0.0}; }
  static bool is_zero(const cplx& z) { return z == cplx{}; }
  static cplx conjugate(const cplx& z) { return std::conj(z); }
  static double magnitude(const cplx& z) { return std::abs(z); }
  static cplx to_cplx(const cplx& z) { return z; }
};

template <>
struct ScalarOps<QComplex> {
  static QComplex zero() { return {}; }
  static QComplex one() { return QComplex(1L); }
  static QComplex i() { return QComplex::i(); }
  static QComplex from_int(long n) { return QComplex(n); }
  static QComplex from_rational(const Rational& q) { return QComplex(q); }
  static bool is_zero(const QComplex& z) { return z.re == 0 && z.im == 0; }
  static QComplex conjugate(const QComplex& z) { return conj(z); }
  static double magnitude(const QComplex& z) { return std::abs(z.to_cplx()); }
  static cplx to_cplx(const QComplex& z) { return z.to_cplx(); }
};

/// A real parameter that remembers an exact rational value when one is known.
///
/// Strings such as "1/2", "0.3" or "-7" parse to exact values; plain doubles
/// stay inexact and push downstream computations onto the floating path.
class Number {
 public:
  Number() = default;
  Number(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  Number(int v) : exact_(Rational(v)), value_(v) {}  // NOLINT(google-explicit-constructor)
  Number(const Rational& q) : exact_(q), value_(q.get_d()) {}  // NOLINT(google-explicit-constructor)

  static Number parse(std::string_view text);

  [[nodiscard]] double value() const { return value_; }
  [[nodiscard]] bool is_exact() const { return exact_.has_value(); }
  [[nodiscard]] const Rational& exact() const;
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Number& a, const Number& b) {
    if (a.is_exact() != b.is_exact()) return false;
    return a.is_exact() ? *a.exact_ == *b.exact_ : a.value_ == b.value_;
  }

 private:
  std::optional<Rational> exact_;
  double value_ = 0.0;
};

// Error taxonomy. Every failure the library reports maps onto one of these.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct KindMismatch : Error {
  using Error::Error;
};
struct NotUnitarizable : Error {
  NotUnitarizable(int level, double eigenvalue);
  int level;
  double most_negative;
};
struct MaxRefinementExceeded : Error {
  using Error::Error;
};
struct TruncationOverflow : Error {
  TruncationOverflow(double leakage, double limit);
  double leakage;
};
struct OutsideChart : Error {
  using Error::Error;
};
struct CurvatureTooLarge : Error {
  using Error::Error;
};
struct BoundaryViolation : Error {
  using Error::Error;
};
struct NonMonotone : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};

}  // namespace lieexp
