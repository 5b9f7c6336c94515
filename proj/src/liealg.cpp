#include "lieexp/liealg.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace lieexp {

// ---------------------------------------------------------------------------
// numeric.hpp out-of-line pieces

Number Number::parse(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  if (s.empty()) throw ValidationError("empty number");
  // Rational literal p/q or integer.
  if (s.find_first_of(".eE") == std::string::npos) {
    Rational q;
    if (q.set_str(s, 10) != 0) throw ValidationError("cannot parse number '" + s + "'");
    q.canonicalize();
    return Number(q);
  }
  // Finite decimal: exact as a rational when no exponent is present.
  if (s.find_first_of("eE") == std::string::npos) {
    bool neg = s[0] == '-';
    std::string body = (neg || s[0] == '+') ? s.substr(1) : s;
    auto dot = body.find('.');
    std::string digits = body.substr(0, dot) + body.substr(dot + 1);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("cannot parse number '" + s + "'");
    size_t frac = body.size() - dot - 1;
    mpz_class num(digits, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
    Rational q(num, den);
    q.canonicalize();
    if (neg) q = -q;
    return Number(q);
  }
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("cannot parse number '" + s + "'");
  return Number(v);
}

const Rational& Number::exact() const {
  if (!exact_) throw Error("number has no exact value");
  return *exact_;
}

std::string Number::to_string() const {
  if (exact_) return exact_->get_str();
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

NotUnitarizable::NotUnitarizable(int lvl, double eigenvalue)
    : Error("not unitarizable: level " + std::to_string(lvl) + " has eigenvalue " +
            std::to_string(eigenvalue)),
      level(lvl),
      most_negative(eigenvalue) {}

TruncationOverflow::TruncationOverflow(double leak, double limit)
    : Error("truncation overflow: top-level mass " + std::to_string(leak) + " exceeds " +
            std::to_string(limit)),
      leakage(leak) {}

// ---------------------------------------------------------------------------
// FiniteLieAlgebra

int FiniteLieAlgebra::index_of(const std::string& label) const {
  for (int i = 0; i < dim; ++i)
    if (labels[static_cast<size_t>(i)] == label) return i;
  throw ValidationError("unknown basis label '" + label + "' for " + name);
}

Rational FiniteLieAlgebra::antisymmetry_residual() const {
  Rational r = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) r += abs(f(i, j, k) + f(j, i, k));
  return r;
}

Rational FiniteLieAlgebra::jacobi_residual() const {
  // [x_a,[x_b,x_c]] + cyclic, component by component.
  Rational total = 0;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      for (int c = 0; c < dim; ++c)
        for (int e = 0; e < dim; ++e) {
          Rational s = 0;
          for (int d = 0; d < dim; ++d) {
            s += f(b, c, d) * f(a, d, e);
            s += f(c, a, d) * f(b, d, e);
            s += f(a, b, d) * f(c, d, e);
          }
          total += abs(s);
        }
  return total;
}

Rational FiniteLieAlgebra::invariance_residual() const {
  // <[z,x],y> + <x,[z,y]> for basis triples.
  Rational total = 0;
  for (int z = 0; z < dim; ++z)
    for (int x = 0; x < dim; ++x)
      for (int y = 0; y < dim; ++y) {
        Rational s = 0;
        for (int k = 0; k < dim; ++k) s += f(z, x, k) * form(k, y) + f(z, y, k) * form(x, k);
        total += abs(s);
      }
  return total;
}

namespace {

std::shared_ptr<FiniteLieAlgebra> blank(const std::string& name, std::vector<std::string> labels) {
  auto g = std::make_shared<FiniteLieAlgebra>();
  g->name = name;
  g->dim = static_cast<int>(labels.size());
  g->labels = std::move(labels);
  auto d = static_cast<size_t>(g->dim);
  g->structure.assign(d * d * d, Rational(0));
  g->inner.assign(d * d, Rational(0));
  g->dagger.assign(d * d, Rational(0));
  g->norm_form.assign(d * d, 0.0);
  return g;
}

void set_bracket(FiniteLieAlgebra& g, int i, int j, int k, const Rational& c) {
  g.structure[static_cast<size_t>((i * g.dim + j) * g.dim + k)] = c;
  g.structure[static_cast<size_t>((j * g.dim + i) * g.dim + k)] = -c;
}

}  // namespace

AlgebraPtr FiniteLieAlgebra::sl2() {
  static const AlgebraPtr g = [] {
    auto a = blank("sl2", {"e", "h", "f"});
    set_bracket(*a, 1, 0, 0, 2);   // [h,e] = 2e
    set_bracket(*a, 1, 2, 2, -2);  // [h,f] = -2f
    set_bracket(*a, 0, 2, 1, 1);   // [e,f] = h
    a->inner[0 * 3 + 2] = 1;
    a->inner[2 * 3 + 0] = 1;
    a->inner[1 * 3 + 1] = 2;
    a->dagger[0 * 3 + 2] = 1;
    a->dagger[1 * 3 + 1] = 1;
    a->dagger[2 * 3 + 0] = 1;
    a->norm_form = {1, 0, 0, 0, 2, 0, 0, 0, 1};
    return AlgebraPtr(a);
  }();
  return g;
}

AlgebraPtr FiniteLieAlgebra::su2() {
  static const AlgebraPtr g = [] {
    auto a = blank("su2", {"X1", "X2", "X3"});
    set_bracket(*a, 0, 1, 2, 1);
    set_bracket(*a, 1, 2, 0, 1);
    set_bracket(*a, 2, 0, 1, 1);
    for (int i = 0; i < 3; ++i) {
      a->inner[static_cast<size_t>(i * 3 + i)] = 1;
      a->dagger[static_cast<size_t>(i * 3 + i)] = -1;
      a->norm_form[static_cast<size_t>(i * 3 + i)] = 1;
    }
    return AlgebraPtr(a);
  }();
  return g;
}

double coefficient_norm(const FiniteLieAlgebra& g, const std::vector<cplx>& v) {
  cplx acc = 0;
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j)
      acc += std::conj(v[static_cast<size_t>(i)]) * g.norm_form[static_cast<size_t>(i * g.dim + j)] *
             v[static_cast<size_t>(j)];
  return std::sqrt(std::max(0.0, acc.real()));
}

// ---------------------------------------------------------------------------
// Conversions

VectField to_float(const QVectField& x) {
  VectField out;
  for (const auto& [n, a] : x.coeffs) out.coeffs[n] = a.to_cplx();
  return out;
}

LoopElement to_float(const QLoopElement& x) {
  LoopElement out(x.algebra);
  for (const auto& [n, v] : x.coeffs) {
    auto& dst = out.coeffs[n];
    for (const auto& a : v) dst.push_back(a.to_cplx());
  }
  return out;
}

CentralElement to_float(const QCentralElement& x) {
  CentralElement out;
  out.kind = x.kind;
  out.vect = to_float(x.vect);
  out.loop = to_float(x.loop);
  out.central = x.central.to_cplx();
  out.central_vir = x.central_vir.to_cplx();
  return out;
}

}  // namespace lieexp
