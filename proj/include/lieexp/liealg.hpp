#pragma once

// Coefficient-level Lie algebra arithmetic: trigonometric vector fields on
// the circle, loop algebra elements over a finite-dimensional Lie algebra,
// their central extensions, cocycles and seminorms.
//
// Convention: fields are stored in e_n = e^{in theta} d/dtheta coordinates.
// L_n = -i e_n, so [e_m, e_n] = i(m-n) e_{m+n} and [L_m, L_n] = (m-n) L_{m+n}.
// Cocycles return the coefficient of the central element (kappa for fields,
// k for loops).

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lieexp/numeric.hpp"

namespace lieexp {

/// Finite-dimensional Lie algebra with exact structure constants.
///
/// [x_i, x_j] = sum_k f(i,j,k) x_k. `dagger` encodes the antilinear
/// involution x -> x^dagger used to define the real form: an element is
/// real (anti-hermitian) iff x^dagger = -x.
struct FiniteLieAlgebra {
  std::string name;
  int dim = 0;
  std::vector<std::string> labels;
  std::vector<Rational> structure;  // dim^3, index (i*dim + j)*dim + k
  std::vector<Rational> inner;      // dim^2, the basic invariant form
  std::vector<Rational> dagger;     // dim^2, row i = coefficients of x_i^dagger
  std::vector<double> norm_form;    // dim^2, positive definite, for |a_n|

  [[nodiscard]] const Rational& f(int i, int j, int k) const {
    return structure[static_cast<size_t>((i * dim + j) * dim + k)];
  }
  [[nodiscard]] const Rational& form(int i, int j) const {
    return inner[static_cast<size_t>(i * dim + j)];
  }
  [[nodiscard]] const Rational& dag(int i, int j) const {
    return dagger[static_cast<size_t>(i * dim + j)];
  }
  [[nodiscard]] int index_of(const std::string& label) const;

  /// Exact residuals: 0 for a valid algebra.
  [[nodiscard]] Rational antisymmetry_residual() const;
  [[nodiscard]] Rational jacobi_residual() const;
  [[nodiscard]] Rational invariance_residual() const;

  /// sl2 in the Chevalley basis (e, h, f), <h,h> = 2, <e,f> = 1,
  /// e^dagger = f, h^dagger = h.
  static std::shared_ptr<const FiniteLieAlgebra> sl2();
  /// su(2) with [X_1, X_2] = X_3 cyclic, orthonormal for -Killing/2.
  static std::shared_ptr<const FiniteLieAlgebra> su2();
};

using AlgebraPtr = std::shared_ptr<const FiniteLieAlgebra>;

template <class S>
struct BasicVectField {
  std::map<int, S> coeffs;

  static BasicVectField mode(int n, S a = ScalarOps<S>::one()) {
    BasicVectField f;
    f.coeffs[n] = a;
    return f;
  }
  /// L_n = -i e_n.
  static BasicVectField L(int n) { return mode(n, -ScalarOps<S>::i()); }

  [[nodiscard]] S at(int n) const {
    auto it = coeffs.find(n);
    return it == coeffs.end() ? ScalarOps<S>::zero() : it->second;
  }
  [[nodiscard]] int degree() const {
    int d = 0;
    for (const auto& [n, a] : coeffs)
      if (!ScalarOps<S>::is_zero(a)) d = std::max(d, std::abs(n));
    return d;
  }
  [[nodiscard]] bool is_zero() const {
    for (const auto& [n, a] : coeffs)
      if (!ScalarOps<S>::is_zero(a)) return false;
    return true;
  }
  /// a_{-n} = conj(a_n) for all n.
  [[nodiscard]] bool is_real() const {
    for (const auto& [n, a] : coeffs)
      if (at(-n) != ScalarOps<S>::conjugate(a)) return false;
    return true;
  }
  /// Coefficients b_n in X = sum b_n L_n (b_n = i a_n).
  [[nodiscard]] std::map<int, S> to_L() const {
    std::map<int, S> out;
    for (const auto& [n, a] : coeffs) out[n] = ScalarOps<S>::i() * a;
    return out;
  }
  static BasicVectField from_L(const std::map<int, S>& b) {
    BasicVectField f;
    for (const auto& [n, v] : b) f.coeffs[n] = -(ScalarOps<S>::i() * v);
    return f;
  }
  void prune() {
    for (auto it = coeffs.begin(); it != coeffs.end();)
      it = ScalarOps<S>::is_zero(it->second) ? coeffs.erase(it) : std::next(it);
  }

  BasicVectField& operator+=(const BasicVectField& o) {
    for (const auto& [n, a] : o.coeffs) {
      auto [it, fresh] = coeffs.try_emplace(n, a);
      if (!fresh) it->second = it->second + a;
    }
    return *this;
  }
  friend BasicVectField operator+(BasicVectField a, const BasicVectField& b) { return a += b; }
  friend BasicVectField operator*(const S& s, BasicVectField a) {
    for (auto& [n, v] : a.coeffs) v = s * v;
    return a;
  }
  friend BasicVectField operator-(const BasicVectField& a, const BasicVectField& b) {
    return a + (S(-1L) * b);
  }
  friend bool operator==(BasicVectField a, BasicVectField b) {
    a.prune();
    b.prune();
    return a.coeffs == b.coeffs;
  }
};

template <class S>
struct BasicLoopElement {
  AlgebraPtr algebra;
  std::map<int, std::vector<S>> coeffs;  // mode -> coefficient vector of length dim

  BasicLoopElement() = default;
  explicit BasicLoopElement(AlgebraPtr g) : algebra(std::move(g)) {}

  /// x_i(n) with coefficient a.
  static BasicLoopElement basis(AlgebraPtr g, int i, int n, S a = ScalarOps<S>::one()) {
    BasicLoopElement x(g);
    x.coeffs[n].assign(static_cast<size_t>(g->dim), ScalarOps<S>::zero());
    x.coeffs[n][static_cast<size_t>(i)] = a;
    return x;
  }

  [[nodiscard]] std::vector<S> at(int n) const {
    auto it = coeffs.find(n);
    if (it == coeffs.end())
      return std::vector<S>(static_cast<size_t>(algebra ? algebra->dim : 0), ScalarOps<S>::zero());
    return it->second;
  }
  [[nodiscard]] int degree() const {
    int d = 0;
    for (const auto& [n, v] : coeffs)
      for (const auto& a : v)
        if (!ScalarOps<S>::is_zero(a)) d = std::max(d, std::abs(n));
    return d;
  }
  [[nodiscard]] bool is_zero() const {
    for (const auto& [n, v] : coeffs)
      for (const auto& a : v)
        if (!ScalarOps<S>::is_zero(a)) return false;
    return true;
  }
  /// Coefficient of mode -n equals -(coefficient of mode n)^dagger.
  [[nodiscard]] bool is_real() const;
  void prune() {
    for (auto it = coeffs.begin(); it != coeffs.end();) {
      bool z = true;
      for (const auto& a : it->second) z = z && ScalarOps<S>::is_zero(a);
      it = z ? coeffs.erase(it) : std::next(it);
    }
  }

  BasicLoopElement& operator+=(const BasicLoopElement& o) {
    if (!algebra) algebra = o.algebra;
    if (o.algebra && algebra != o.algebra && algebra->name != o.algebra->name)
      throw KindMismatch("loop elements over different algebras");
    for (const auto& [n, v] : o.coeffs) {
      auto& dst = coeffs[n];
      if (dst.empty()) dst.assign(v.size(), ScalarOps<S>::zero());
      for (size_t i = 0; i < v.size(); ++i) dst[i] = dst[i] + v[i];
    }
    return *this;
  }
  friend BasicLoopElement operator+(BasicLoopElement a, const BasicLoopElement& b) { return a += b; }
  friend BasicLoopElement operator*(const S& s, BasicLoopElement a) {
    for (auto& [n, v] : a.coeffs)
      for (auto& x : v) x = s * x;
    return a;
  }
  friend bool operator==(BasicLoopElement a, BasicLoopElement b) {
    a.prune();
    b.prune();
    return a.coeffs == b.coeffs;
  }
};

enum class AlgebraKind { Vect, Loop };

/// X + t * (central element). For the loop kind an optional vector-field
/// part makes it an element of the semidirect sum with Vect(S^1); its own
/// cocycle is carried in `central_vir`.
template <class S>
struct BasicCentralElement {
  AlgebraKind kind = AlgebraKind::Vect;
  BasicVectField<S> vect;
  BasicLoopElement<S> loop;
  S central = ScalarOps<S>::zero();
  S central_vir = ScalarOps<S>::zero();

  static BasicCentralElement of(BasicVectField<S> f, S t = ScalarOps<S>::zero()) {
    BasicCentralElement x;
    x.kind = AlgebraKind::Vect;
    x.vect = std::move(f);
    x.central = t;
    return x;
  }
  static BasicCentralElement of(BasicLoopElement<S> l, S t = ScalarOps<S>::zero()) {
    BasicCentralElement x;
    x.kind = AlgebraKind::Loop;
    x.loop = std::move(l);
    x.central = t;
    return x;
  }
  [[nodiscard]] int degree() const { return std::max(vect.degree(), loop.degree()); }
  [[nodiscard]] bool is_real() const {
    return vect.is_real() && (kind == AlgebraKind::Vect || loop.is_real());
  }

  BasicCentralElement& operator+=(const BasicCentralElement& o) {
    if (kind != o.kind) throw KindMismatch("central elements of different kinds");
    vect += o.vect;
    loop += o.loop;
    central = central + o.central;
    central_vir = central_vir + o.central_vir;
    return *this;
  }
  friend BasicCentralElement operator+(BasicCentralElement a, const BasicCentralElement& b) {
    return a += b;
  }
  friend BasicCentralElement operator*(const S& s, BasicCentralElement a) {
    a.vect = s * a.vect;
    a.loop = s * a.loop;
    a.central = s * a.central;
    a.central_vir = s * a.central_vir;
    return a;
  }
};

using VectField = BasicVectField<cplx>;
using QVectField = BasicVectField<QComplex>;
using LoopElement = BasicLoopElement<cplx>;
using QLoopElement = BasicLoopElement<QComplex>;
using CentralElement = BasicCentralElement<cplx>;
using QCentralElement = BasicCentralElement<QComplex>;

// ---------------------------------------------------------------------------
// Operations

/// (f'g - f g') d/dtheta.
template <class S>
BasicVectField<S> bracket_vect(const BasicVectField<S>& f, const BasicVectField<S>& g) {
  BasicVectField<S> out;
  for (const auto& [m, a] : f.coeffs)
    for (const auto& [n, b] : g.coeffs) {
      S c = ScalarOps<S>::i() * ScalarOps<S>::from_int(m - n) * a * b;
      auto [it, fresh] = out.coeffs.try_emplace(m + n, c);
      if (!fresh) it->second = it->second + c;
    }
  out.prune();
  return out;
}

/// Coefficient of kappa: omega(e_m, e_n) = -delta_{m+n,0} (m^3 - m)/12.
template <class S>
S virasoro_cocycle(const BasicVectField<S>& f, const BasicVectField<S>& g) {
  S acc = ScalarOps<S>::zero();
  for (const auto& [m, a] : f.coeffs) {
    if (m == 0 || m == 1 || m == -1) continue;
    auto it = g.coeffs.find(-m);
    if (it == g.coeffs.end()) continue;
    long w = static_cast<long>(m) * m * m - m;
    acc = acc - ScalarOps<S>::from_rational(frac(w, 12)) * a * it->second;
  }
  return acc;
}

/// <x, y> for coefficient vectors (bilinear, no conjugation).
template <class S>
S algebra_form(const FiniteLieAlgebra& g, const std::vector<S>& x, const std::vector<S>& y) {
  S acc = ScalarOps<S>::zero();
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j) {
      const Rational& w = g.form(i, j);
      if (w == 0) continue;
      acc = acc + ScalarOps<S>::from_rational(w) * x[static_cast<size_t>(i)] * y[static_cast<size_t>(j)];
    }
  return acc;
}

template <class S>
std::vector<S> algebra_bracket(const FiniteLieAlgebra& g, const std::vector<S>& x,
                               const std::vector<S>& y) {
  std::vector<S> out(static_cast<size_t>(g.dim), ScalarOps<S>::zero());
  for (int i = 0; i < g.dim; ++i) {
    if (ScalarOps<S>::is_zero(x[static_cast<size_t>(i)])) continue;
    for (int j = 0; j < g.dim; ++j) {
      if (ScalarOps<S>::is_zero(y[static_cast<size_t>(j)])) continue;
      S xy = x[static_cast<size_t>(i)] * y[static_cast<size_t>(j)];
      for (int k = 0; k < g.dim; ++k) {
        const Rational& c = g.f(i, j, k);
        if (c != 0) out[static_cast<size_t>(k)] = out[static_cast<size_t>(k)] + ScalarOps<S>::from_rational(c) * xy;
      }
    }
  }
  return out;
}

inline void require_same_algebra(const AlgebraPtr& a, const AlgebraPtr& b) {
  if (!a || !b) return;
  if (a != b && a->name != b->name) throw KindMismatch("loop elements over different algebras: " + a->name + " vs " + b->name);
}

/// Pointwise bracket of loop elements.
template <class S>
BasicLoopElement<S> bracket_loop(const BasicLoopElement<S>& x, const BasicLoopElement<S>& y) {
  require_same_algebra(x.algebra, y.algebra);
  BasicLoopElement<S> out(x.algebra ? x.algebra : y.algebra);
  if (!out.algebra) return out;
  for (const auto& [m, a] : x.coeffs)
    for (const auto& [n, b] : y.coeffs) out += [&] {
        BasicLoopElement<S> t(out.algebra);
        t.coeffs[m + n] = algebra_bracket(*out.algebra, a, b);
        return t;
      }();
  out.prune();
  return out;
}

/// Coefficient of k: sum_m m <x_m, y_{-m}>.
template <class S>
S loop_cocycle(const BasicLoopElement<S>& x, const BasicLoopElement<S>& y) {
  require_same_algebra(x.algebra, y.algebra);
  S acc = ScalarOps<S>::zero();
  if (!x.algebra && !y.algebra) return acc;
  const FiniteLieAlgebra& g = x.algebra ? *x.algebra : *y.algebra;
  for (const auto& [m, a] : x.coeffs) {
    if (m == 0) continue;
    auto it = y.coeffs.find(-m);
    if (it == y.coeffs.end()) continue;
    acc = acc + ScalarOps<S>::from_int(m) * algebra_form(g, a, it->second);
  }
  return acc;
}

/// Action of a field on a loop element inside the semidirect sum:
/// [f d/dtheta, X] = -f X'.
template <class S>
BasicLoopElement<S> field_on_loop(const BasicVectField<S>& f, const BasicLoopElement<S>& x) {
  BasicLoopElement<S> out(x.algebra);
  for (const auto& [m, a] : f.coeffs)
    for (const auto& [n, v] : x.coeffs) {
      BasicLoopElement<S> t(x.algebra);
      S s = -(ScalarOps<S>::i() * ScalarOps<S>::from_int(n) * a);
      t.coeffs[m + n] = v;
      out += s * t;
    }
  out.prune();
  return out;
}

/// [a, b] in the centrally extended algebra; central inputs never contribute.
template <class S>
BasicCentralElement<S> central_bracket(const BasicCentralElement<S>& a,
                                       const BasicCentralElement<S>& b) {
  if (a.kind != b.kind) throw KindMismatch("central_bracket: incompatible kinds");
  BasicCentralElement<S> out;
  out.kind = a.kind;
  out.vect = bracket_vect(a.vect, b.vect);
  if (a.kind == AlgebraKind::Vect) {
    out.central = virasoro_cocycle(a.vect, b.vect);
    return out;
  }
  out.loop = bracket_loop(a.loop, b.loop) + field_on_loop(a.vect, b.loop) +
             (S(-1L) * field_on_loop(b.vect, a.loop));
  out.loop.prune();
  out.central = loop_cocycle(a.loop, b.loop);
  out.central_vir = virasoro_cocycle(a.vect, b.vect);
  return out;
}

/// [L_0, X]: every mode-n coefficient is multiplied by -n.
template <class S>
BasicCentralElement<S> l0_commutator(const BasicCentralElement<S>& x) {
  BasicCentralElement<S> out;
  out.kind = x.kind;
  out.loop.algebra = x.loop.algebra;
  for (const auto& [n, a] : x.vect.coeffs)
    if (n != 0) out.vect.coeffs[n] = ScalarOps<S>::from_int(-n) * a;
  for (const auto& [n, v] : x.loop.coeffs)
    if (n != 0) {
      auto& dst = out.loop.coeffs[n];
      for (const auto& c : v) dst.push_back(ScalarOps<S>::from_int(-n) * c);
    }
  return out;
}

/// Norm of a loop coefficient vector with respect to the algebra's norm form.
double coefficient_norm(const FiniteLieAlgebra& g, const std::vector<cplx>& v);

/// ||X||_s = sum_n (1+|n|)^s |a_n|. Central parts are ignored.
template <class S>
double seminorm(const BasicVectField<S>& x, double s) {
  double acc = 0;
  for (const auto& [n, a] : x.coeffs) acc += std::pow(1.0 + std::abs(n), s) * ScalarOps<S>::magnitude(a);
  return acc;
}
template <class S>
double seminorm(const BasicLoopElement<S>& x, double s) {
  double acc = 0;
  for (const auto& [n, v] : x.coeffs) {
    std::vector<cplx> c;
    c.reserve(v.size());
    for (const auto& a : v) c.push_back(ScalarOps<S>::to_cplx(a));
    acc += std::pow(1.0 + std::abs(n), s) * coefficient_norm(*x.algebra, c);
  }
  return acc;
}
template <class S>
double seminorm(const BasicCentralElement<S>& x, double s) {
  return seminorm(x.vect, s) + (x.loop.algebra ? seminorm(x.loop, s) : 0.0);
}

/// |X|_{A,n}: seminorm of [L_0, X] under a caller-chosen seminorm family.
template <class S, class Family>
double dtheta_bracket_norm(const BasicCentralElement<S>& x, double n, Family&& family) {
  return family(l0_commutator(x), n);
}
/// Plain-seminorm variant.
template <class S>
double dtheta_bracket_norm(const BasicCentralElement<S>& x, double n) {
  return seminorm(l0_commutator(x), n);
}

template <class S>
bool BasicLoopElement<S>::is_real() const {
  if (!algebra) return true;
  const auto& g = *algebra;
  for (const auto& [n, v] : coeffs) {
    // -(v)^dagger as coefficients: sum_i conj(v_i) * dagger row i
    std::vector<S> want(static_cast<size_t>(g.dim), ScalarOps<S>::zero());
    for (int i = 0; i < g.dim; ++i)
      for (int j = 0; j < g.dim; ++j)
        if (g.dag(i, j) != 0)
          want[static_cast<size_t>(j)] = want[static_cast<size_t>(j)] -
              ScalarOps<S>::from_rational(g.dag(i, j)) * ScalarOps<S>::conjugate(v[static_cast<size_t>(i)]);
    if (at(-n) != want) return false;
  }
  return true;
}

// Conversions between exact and floating coefficients.
VectField to_float(const QVectField& x);
LoopElement to_float(const QLoopElement& x);
CentralElement to_float(const QCentralElement& x);

}  // namespace lieexp
