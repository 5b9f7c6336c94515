#include "lieexp/hwmod.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace lieexp {

namespace {

template <class T>
T from_q(const Rational& q);
template <>
Rational from_q<Rational>(const Rational& q) {
  return q;
}
template <>
double from_q<double>(const Rational& q) {
  return q.get_d();
}

template <class T>
bool is_zero_t(const T& v) {
  return v == 0;
}

template <class T, class Vec>
void accumulate(Vec& out, const PBWMonomial& w, const T& coeff) {
  if (is_zero_t(coeff)) return;
  auto [it, fresh] = out.try_emplace(w, coeff);
  if (!fresh) {
    it->second += coeff;
    if (is_zero_t(it->second)) out.erase(it);
  }
}

// Sugawara dual basis for (e, h, f): x^i = (f, h/2, e).
constexpr int kDualGen[3] = {2, 1, 0};
constexpr double kDualScale[3] = {1.0, 0.5, 1.0};

}  // namespace

// ---------------------------------------------------------------------------
// HighestWeightSpec

HighestWeightSpec HighestWeightSpec::virasoro(Number c, Number h, int N) {
  HighestWeightSpec s;
  s.kind = ModuleKind::Virasoro;
  s.c = std::move(c);
  s.h = std::move(h);
  s.N = N;
  return s;
}

HighestWeightSpec HighestWeightSpec::affine(int ell, int lambda, int N) {
  HighestWeightSpec s;
  s.kind = ModuleKind::AffineSL2;
  s.ell = ell;
  s.lambda = lambda;
  s.N = N;
  return s;
}

void HighestWeightSpec::validate() const {
  if (N < 0) throw ValidationError("module.N must be >= 0");
  if (kind == ModuleKind::AffineSL2) {
    if (ell < 0) throw ValidationError("module.ell must be >= 0");
    if (lambda < 0 || lambda > ell) throw ValidationError("module.lambda must satisfy 0 <= lambda <= ell");
  }
}

std::string HighestWeightSpec::canonical() const {
  std::ostringstream os;
  if (kind == ModuleKind::Virasoro)
    os << "virasoro;c=" << c.to_string() << ";h=" << h.to_string() << ";N=" << N;
  else
    os << "affine-sl2;ell=" << ell << ";lambda=" << lambda << ";N=" << N;
  return os.str();
}

// ---------------------------------------------------------------------------
// PBW monomials

int PBWMonomial::level() const {
  int s = 0;
  for (const auto& f : factors) s += f.second;
  return s;
}

std::string PBWMonomial::to_string(ModuleKind kind) const {
  static const char* names[3] = {"e", "h", "f"};
  std::ostringstream os;
  for (const auto& [g, n] : factors) {
    if (kind == ModuleKind::Virasoro)
      os << "L_{-" << n << "}";
    else
      os << names[g] << "(" << -n << ")";
  }
  os << (kind == ModuleKind::Virasoro ? "Omega" : "v");
  return os.str();
}

namespace {

// Canonical order: n nonincreasing, then generator nondecreasing.
bool precedes_or_equal(int g1, int n1, int g2, int n2) {
  return n1 > n2 || (n1 == n2 && g1 <= g2);
}

void enumerate(int remaining, int max_n, int min_g, int gens, std::vector<std::pair<int, int>>& cur,
               std::vector<PBWMonomial>& out) {
  if (remaining == 0) {
    out.push_back(PBWMonomial{cur});
    return;
  }
  for (int n = std::min(remaining, max_n); n >= 1; --n)
    for (int g = (n == max_n ? min_g : 0); g < gens; ++g) {
      cur.emplace_back(g, n);
      enumerate(remaining - n, n, g, gens, cur, out);
      cur.pop_back();
    }
}

}  // namespace

template <class T>
VermaEngine<T>::VermaEngine(const HighestWeightSpec& spec) : spec_(spec) {
  spec_.validate();
  if (spec_.kind == ModuleKind::Virasoro) {
    if constexpr (std::is_same_v<T, Rational>) {
      c_ = spec_.c.exact();
      h_ = spec_.h.exact();
    } else {
      c_ = spec_.c.value();
      h_ = spec_.h.value();
    }
  }
  const int gens = num_generators();
  basis_.resize(static_cast<size_t>(spec_.N + 1));
  for (int k = 0; k <= spec_.N; ++k) {
    std::vector<PBWMonomial> negative;
    std::vector<std::pair<int, int>> cur;
    enumerate(k, k, 0, gens, cur, negative);
    if (spec_.kind == ModuleKind::Virasoro) {
      basis_[static_cast<size_t>(k)] = std::move(negative);
    } else {
      for (const auto& m : negative)
        for (int a = 0; a <= spec_.lambda; ++a) {
          PBWMonomial w = m;
          for (int i = 0; i < a; ++i) w.factors.emplace_back(2, 0);
          basis_[static_cast<size_t>(k)].push_back(std::move(w));
        }
    }
  }
}

template <class T>
std::vector<int> VermaEngine<T>::level_dims() const {
  std::vector<int> d;
  for (const auto& b : basis_) d.push_back(static_cast<int>(b.size()));
  return d;
}

template <class T>
int VermaEngine<T>::dagger(int gen) const {
  return spec_.kind == ModuleKind::Virasoro ? 0 : 2 - gen;
}

template <class T>
void VermaEngine<T>::add_bracket(Vec& out, int x, int m, int y, int n, const PBWMonomial& rest,
                                 const T& coeff) {
  // [x(m), y(n)] applied to rest, times coeff.
  if (spec_.kind == ModuleKind::Virasoro) {
    if (m != n) {
      const Vec& r = apply(0, m + n, rest);
      T s = coeff * T(m - n);
      for (const auto& [w, a] : r) accumulate<T>(out, w, s * a);
    }
    if (m + n == 0) {
      long w3 = static_cast<long>(m) * m * m - m;
      accumulate<T>(out, rest, coeff * from_q<T>(frac(w3, 12)) * c_);
    }
    return;
  }
  const auto& g = *FiniteLieAlgebra::sl2();
  for (int z = 0; z < 3; ++z) {
    const Rational& f = g.f(x, y, z);
    if (f == 0) continue;
    const Vec& r = apply(z, m + n, rest);
    T s = coeff * from_q<T>(f);
    for (const auto& [w, a] : r) accumulate<T>(out, w, s * a);
  }
  if (m + n == 0 && m != 0 && g.form(x, y) != 0)
    accumulate<T>(out, rest, coeff * T(m) * from_q<T>(g.form(x, y)) * T(spec_.ell));
}

template <class T>
const typename VermaEngine<T>::Vec& VermaEngine<T>::apply(int gen, int m, const PBWMonomial& w) {
  auto key = std::make_tuple(gen, m, w);
  if (auto it = apply_cache_.find(key); it != apply_cache_.end()) return it->second;

  Vec out;
  const bool has_negative = !w.factors.empty() && w.factors.front().second > 0;
  if (spec_.kind == ModuleKind::Virasoro && m == 0) {
    accumulate<T>(out, w, h_ + T(w.level()));
  } else if (!has_negative) {
    if (m < 0) {
      PBWMonomial p = w;
      p.factors.insert(p.factors.begin(), {gen, -m});
      out.emplace(std::move(p), T(1));
    } else if (m == 0) {
      // Affine zero mode on f(0)^a v.
      const int a = static_cast<int>(w.factors.size());
      const int lam = spec_.lambda;
      if (gen == 1) {
        accumulate<T>(out, w, T(lam - 2 * a));
      } else if (gen == 2) {
        if (a + 1 <= lam) {
          PBWMonomial p = w;
          p.factors.emplace_back(2, 0);
          out.emplace(std::move(p), T(1));
        }
      } else if (a > 0) {
        PBWMonomial p = w;
        p.factors.pop_back();
        accumulate<T>(out, p, T(a * (lam - a + 1)));
      }
    }
  } else {
    auto [y, n1] = w.factors.front();
    if (m < 0 && precedes_or_equal(gen, -m, y, n1)) {
      PBWMonomial p = w;
      p.factors.insert(p.factors.begin(), {gen, -m});
      out.emplace(std::move(p), T(1));
    } else {
      PBWMonomial rest;
      rest.factors.assign(w.factors.begin() + 1, w.factors.end());
      // x(m) y(-n1) rest = y(-n1) x(m) rest + [x(m), y(-n1)] rest
      Vec inner = apply(gen, m, rest);
      for (const auto& [u, a] : inner) {
        const Vec& r = apply(y, -n1, u);
        for (const auto& [v, b] : r) accumulate<T>(out, v, a * b);
      }
      add_bracket(out, gen, m, y, -n1, rest, T(1));
    }
  }
  return apply_cache_.emplace(std::move(key), std::move(out)).first->second;
}

template <class T>
typename VermaEngine<T>::Vec VermaEngine<T>::apply(int gen, int m, const Vec& v) {
  Vec out;
  for (const auto& [w, a] : v) {
    const Vec& r = apply(gen, m, w);
    for (const auto& [u, b] : r) accumulate<T>(out, u, a * b);
  }
  return out;
}

template <class T>
T VermaEngine<T>::inner(const PBWMonomial& a, const PBWMonomial& b) {
  if (a.level() != b.level()) return T(0);
  if (a.factors.empty()) return b.factors.empty() ? T(1) : T(0);
  if (b.factors.empty()) return T(0);
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  if (auto it = inner_cache_.find(key); it != inner_cache_.end()) return it->second;
  // <y(-n) rest, b> = <rest, y^dagger(n) b>
  auto [y, n] = a.factors.front();
  PBWMonomial rest;
  rest.factors.assign(a.factors.begin() + 1, a.factors.end());
  const Vec& r = apply(dagger(y), n, b);
  T acc(0);
  for (const auto& [u, c] : r) acc += c * inner(rest, u);
  inner_cache_.emplace(std::move(key), acc);
  return acc;
}

template <class T>
std::vector<std::vector<T>> VermaEngine<T>::gram(int level) {
  const auto& b = basis(level);
  std::vector<std::vector<T>> g(b.size(), std::vector<T>(b.size(), T(0)));
  for (size_t i = 0; i < b.size(); ++i)
    for (size_t j = i; j < b.size(); ++j) g[i][j] = g[j][i] = inner(b[i], b[j]);
  return g;
}

template class VermaEngine<Rational>;
template class VermaEngine<double>;

std::vector<int> Verma::level_dims() const {
  std::vector<int> d;
  for (const auto& b : basis) d.push_back(static_cast<int>(b.size()));
  return d;
}

Verma build_verma(const HighestWeightSpec& spec) {
  Verma v;
  v.spec = spec;
  const bool exact = spec.kind == ModuleKind::AffineSL2 || (spec.c.is_exact() && spec.h.is_exact());
  if (exact) {
    v.exact = std::make_shared<VermaEngine<Rational>>(spec);
    for (int k = 0; k <= spec.N; ++k) v.basis.push_back(v.exact->basis(k));
  }
  v.floating = std::make_shared<VermaEngine<double>>(spec);
  if (!exact)
    for (int k = 0; k <= spec.N; ++k) v.basis.push_back(v.floating->basis(k));
  return v;
}

MatrixXd gram_matrix(const Verma& v, int level) {
  if (level < 0 || level > v.spec.N) throw ValidationError("gram_matrix: level outside 0..N");
  if (v.exact) {
    auto g = v.exact->gram(level);
    MatrixXd out(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
    for (size_t i = 0; i < g.size(); ++i)
      for (size_t j = 0; j < g.size(); ++j)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[i][j].get_d();
    return out;
  }
  auto g = v.floating->gram(level);
  MatrixXd out(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = 0; j < g.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[i][j];
  return out;
}

std::vector<std::vector<Rational>> gram_matrix_exact(const Verma& v, int level) {
  if (!v.exact) throw Error("gram_matrix_exact: weights are not exact");
  if (level < 0 || level > v.spec.N) throw ValidationError("gram_matrix: level outside 0..N");
  return v.exact->gram(level);
}

int exact_psd_rank(std::vector<std::vector<Rational>> g, bool* negative) {
  // Symmetric elimination with diagonal pivoting. A PSD matrix with a zero
  // diagonal entry has that whole row zero; anything else is indefinite.
  const size_t n = g.size();
  std::vector<bool> done(n, false);
  int rank = 0;
  if (negative) *negative = false;
  for (size_t step = 0; step < n; ++step) {
    size_t p = n;
    for (size_t i = 0; i < n; ++i)
      if (!done[i] && g[i][i] != 0 && (p == n || abs(g[i][i]) > abs(g[p][p]))) p = i;
    if (p == n) {
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
          if (!done[i] && !done[j] && g[i][j] != 0) {
            if (negative) *negative = true;
            return rank;
          }
      break;
    }
    if (g[p][p] < 0) {
      if (negative) *negative = true;
      return rank;
    }
    done[p] = true;
    ++rank;
    for (size_t i = 0; i < n; ++i) {
      if (done[i] || g[i][p] == 0) continue;
      Rational f = g[i][p] / g[p][p];
      for (size_t j = 0; j < n; ++j)
        if (!done[j]) g[i][j] -= f * g[p][j];
    }
  }
  return rank;
}

// ---------------------------------------------------------------------------
// GradedModule accessors

int GradedModule::level_of(int index) const {
  for (int k = N(); k >= 0; --k)
    if (index >= offsets[static_cast<size_t>(k)]) return k;
  return 0;
}

const MatrixXd& GradedModule::L(int n) const {
  if (!has_virasoro) throw KindMismatch("module has no Virasoro action");
  if (n < -N() || n > N()) {
    if (zero_.rows() != total) const_cast<MatrixXd&>(zero_) = MatrixXd::Zero(total, total);
    return zero_;
  }
  return l_ops[static_cast<size_t>(n + N())];
}

const MatrixXd& GradedModule::x(int gen, int n) const {
  if (!is_affine()) throw KindMismatch("module has no affine currents");
  if (n < -N() || n > N()) {
    if (zero_.rows() != total) const_cast<MatrixXd&>(zero_) = MatrixXd::Zero(total, total);
    return zero_;
  }
  return x_ops[static_cast<size_t>(gen)][static_cast<size_t>(n + N())];
}

MatrixXd GradedModule::block(const MatrixXd& op, int to_level, int from_level) const {
  return op.block(offsets[static_cast<size_t>(to_level)], offsets[static_cast<size_t>(from_level)],
                  dims[static_cast<size_t>(to_level)], dims[static_cast<size_t>(from_level)]);
}

VectorXd GradedModule::l0_diagonal() const {
  VectorXd d(total);
  for (int k = 0; k <= N(); ++k)
    d.segment(offsets[static_cast<size_t>(k)], dims[static_cast<size_t>(k)]).setConstant(h0 + k);
  return d;
}

VectorXd GradedModule::a_diagonal() const { return l0_diagonal().array() + 1.0; }

VectorXd GradedModule::window(int j) const {
  VectorXd w = VectorXd::Zero(total);
  w.head(window_dim(j)).setOnes();
  return w;
}

int GradedModule::window_dim(int j) const {
  if (j < 0) return 0;
  if (j >= N()) return total;
  return offsets[static_cast<size_t>(j + 1)];
}

// ---------------------------------------------------------------------------
// Unitarization by inductive orthonormal bases

namespace {

// Blocks of a lowering operator indexed by source level; block k maps
// level k to level k - n and is empty when k - n < 0.
using Blocks = std::vector<MatrixXd>;

struct LevelBasis {
  MatrixXd W;     // spanning coordinates -> new orthonormal vectors
  int kept = 0;
};

LevelBasis orthonormalize(const MatrixXd& gamma_in, int level, const UnitarizeOptions& opt) {
  LevelBasis out;
  if (gamma_in.rows() == 0) {
    out.W = MatrixXd(0, 0);
    return out;
  }
  MatrixXd gamma = 0.5 * (gamma_in + gamma_in.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gamma);
  const VectorXd& ev = es.eigenvalues();
  const double norm = ev.cwiseAbs().maxCoeff();
  if (ev(0) < -opt.tol_psd * norm) throw NotUnitarizable(level, ev(0));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (norm > 0 && ev(i) > opt.tol_null * norm) keep.push_back(i);
  out.kept = static_cast<int>(keep.size());
  out.W.resize(gamma.rows(), out.kept);
  for (int j = 0; j < out.kept; ++j)
    out.W.col(j) = es.eigenvectors().col(keep[static_cast<size_t>(j)]) / std::sqrt(ev(keep[static_cast<size_t>(j)]));
  return out;
}

void finalize_layout(GradedModule& m) {
  m.offsets.assign(m.dims.size(), 0);
  int acc = 0;
  for (size_t k = 0; k < m.dims.size(); ++k) {
    m.offsets[k] = acc;
    acc += m.dims[k];
  }
  m.total = acc;
}

// Place lowering blocks of mode n (source level k -> k - n) into a dense matrix.
MatrixXd dense_from_blocks(const GradedModule& m, const Blocks& b, int n) {
  MatrixXd out = MatrixXd::Zero(m.total, m.total);
  for (int k = std::max(0, n); k <= m.N(); ++k) {
    const MatrixXd& blk = b[static_cast<size_t>(k)];
    if (blk.size() == 0) continue;
    out.block(m.offsets[static_cast<size_t>(k - n)], m.offsets[static_cast<size_t>(k)], blk.rows(), blk.cols()) = blk;
  }
  return out;
}

void unitarize_virasoro(GradedModule& m, const UnitarizeOptions& opt) {
  const int N = m.spec.N;
  const double c = m.spec.c.value();
  const double h = m.spec.h.value();
  m.h0 = h;
  m.c_value = c;
  m.dims.assign(static_cast<size_t>(N + 1), 0);
  m.null_counts.assign(static_cast<size_t>(N + 1), 0);
  m.dims[0] = 1;
  auto d = [&](int k) { return k < 0 ? 0 : m.dims[static_cast<size_t>(k)]; };

  // Ln[n][k]: L_n restricted to level k, target level k - n.
  std::vector<Blocks> Ln(static_cast<size_t>(N + 1), Blocks(static_cast<size_t>(N + 1)));
  auto blk = [&](int n, int k) -> MatrixXd {
    if (k < 0 || k > N) return MatrixXd(d(k - n), d(k));
    const MatrixXd& b = Ln[static_cast<size_t>(n)][static_cast<size_t>(k)];
    if (b.rows() != d(k - n) || b.cols() != d(k)) return MatrixXd::Zero(d(k - n), d(k));
    return b;
  };

  for (int k = 1; k <= N; ++k) {
    const int n1 = d(k - 1), n2 = d(k - 2);
    MatrixXd gamma = MatrixXd::Zero(n1 + n2, n1 + n2);
    const MatrixXd L1a = blk(1, k - 1);  // level k-1 -> k-2
    gamma.topLeftCorner(n1, n1) = L1a.transpose() * L1a + 2.0 * (h + k - 1) * MatrixXd::Identity(n1, n1);
    if (n2 > 0) {
      const MatrixXd L2b = blk(2, k - 2);
      gamma.bottomRightCorner(n2, n2) =
          L2b.transpose() * L2b + (4.0 * (h + k - 2) + c / 2.0) * MatrixXd::Identity(n2, n2);
      MatrixXd g12 = blk(2, k - 1).transpose() * blk(1, k - 2) + 3.0 * L1a.transpose();
      gamma.topRightCorner(n1, n2) = g12;
      gamma.bottomLeftCorner(n2, n1) = g12.transpose();
    }
    LevelBasis lb = orthonormalize(gamma, k, opt);
    m.dims[static_cast<size_t>(k)] = lb.kept;
    m.null_counts[static_cast<size_t>(k)] = static_cast<int>(gamma.rows()) - lb.kept;
    MatrixXd gw = gamma * lb.W;
    Ln[1][static_cast<size_t>(k)] = gw.topRows(n1);
    if (k >= 2) Ln[2][static_cast<size_t>(k)] = gw.bottomRows(n2);
  }
  // L_n = [L_{n-1}, L_1] / (n - 2) for n >= 3.
  for (int n = 3; n <= N; ++n)
    for (int k = n; k <= N; ++k)
      Ln[static_cast<size_t>(n)][static_cast<size_t>(k)] =
          (blk(n - 1, k - 1) * blk(1, k) - blk(1, k - n + 1) * blk(n - 1, k)) / double(n - 2);

  finalize_layout(m);
  m.l_ops.assign(static_cast<size_t>(2 * N + 1), MatrixXd());
  m.l_ops[static_cast<size_t>(N)] = m.l0_diagonal().asDiagonal();
  for (int n = 1; n <= N; ++n) {
    for (int k = 0; k <= N; ++k)
      if (k < n || Ln[static_cast<size_t>(n)][static_cast<size_t>(k)].size() == 0)
        Ln[static_cast<size_t>(n)][static_cast<size_t>(k)] = MatrixXd::Zero(d(k - n), d(k));
    MatrixXd op = dense_from_blocks(m, Ln[static_cast<size_t>(n)], n);
    m.l_ops[static_cast<size_t>(N + n)] = op;
    m.l_ops[static_cast<size_t>(N - n)] = op.transpose();
  }
  m.has_virasoro = true;
}

void unitarize_affine(GradedModule& m, const UnitarizeOptions& opt) {
  const int N = m.spec.N;
  const int lam = m.spec.lambda;
  const double ell = m.spec.ell;
  const auto& g = *FiniteLieAlgebra::sl2();
  const double casimir = lam * (lam + 2) / 2.0;
  m.h0 = casimir / (2.0 * (ell + 2.0));
  m.l0_shift = m.h0;
  m.ell_value = ell;
  m.c_value = 3.0 * ell / (ell + 2.0);
  m.dims.assign(static_cast<size_t>(N + 1), 0);
  m.null_counts.assign(static_cast<size_t>(N + 1), 0);
  m.dims[0] = lam + 1;
  auto d = [&](int k) { return k < 0 ? 0 : m.dims[static_cast<size_t>(k)]; };
  auto dag = [](int x) { return 2 - x; };

  // P[x][k]: x(1) on level k; Z[x][k]: x(0) on level k.
  std::array<Blocks, 3> P, Z;
  for (int x = 0; x < 3; ++x) {
    P[static_cast<size_t>(x)].assign(static_cast<size_t>(N + 1), MatrixXd());
    Z[static_cast<size_t>(x)].assign(static_cast<size_t>(N + 1), MatrixXd());
  }
  {
    MatrixXd e = MatrixXd::Zero(lam + 1, lam + 1), hh = e, f = e;
    for (int a = 0; a <= lam; ++a) {
      hh(a, a) = lam - 2 * a;
      if (a + 1 <= lam) f(a + 1, a) = std::sqrt(double((a + 1) * (lam - a)));
      if (a >= 1) e(a - 1, a) = std::sqrt(double(a * (lam - a + 1)));
    }
    Z[0][0] = e;
    Z[1][0] = hh;
    Z[2][0] = f;
    for (int x = 0; x < 3; ++x) P[static_cast<size_t>(x)][0] = MatrixXd(0, lam + 1);
  }

  for (int k = 1; k <= N; ++k) {
    const int p = d(k - 1);
    const int S = 3 * p;
    MatrixXd gamma = MatrixXd::Zero(S, S);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) {
        const MatrixXd& Py = P[static_cast<size_t>(dag(y))][static_cast<size_t>(k - 1)];
        const MatrixXd& Px = P[static_cast<size_t>(dag(x))][static_cast<size_t>(k - 1)];
        MatrixXd b = Py.transpose() * Px;
        for (int z = 0; z < 3; ++z) {
          const Rational& fc = g.f(dag(x), y, z);
          if (fc != 0) b += fc.get_d() * Z[static_cast<size_t>(z)][static_cast<size_t>(k - 1)];
        }
        b.diagonal().array() += g.form(dag(x), y).get_d() * ell;
        gamma.block(x * p, y * p, p, p) = b;
      }
    LevelBasis lb = orthonormalize(gamma, k, opt);
    m.dims[static_cast<size_t>(k)] = lb.kept;
    m.null_counts[static_cast<size_t>(k)] = S - lb.kept;
    MatrixXd sym = 0.5 * (gamma + gamma.transpose());
    MatrixXd gw = sym * lb.W;
    for (int x = 0; x < 3; ++x) P[static_cast<size_t>(x)][static_cast<size_t>(k)] = gw.middleRows(dag(x) * p, p);
    for (int z = 0; z < 3; ++z) {
      MatrixXd T = MatrixXd::Zero(S, S);
      const MatrixXd& Zp = Z[static_cast<size_t>(z)][static_cast<size_t>(k - 1)];
      for (int y = 0; y < 3; ++y) {
        T.block(y * p, y * p, p, p) += Zp;
        for (int w = 0; w < 3; ++w) {
          const Rational& fc = g.f(z, y, w);
          if (fc != 0) T.block(w * p, y * p, p, p).diagonal().array() += fc.get_d();
        }
      }
      Z[static_cast<size_t>(z)][static_cast<size_t>(k)] = lb.W.transpose() * sym * T * lb.W;
    }
  }

  finalize_layout(m);
  // Lowering blocks for every mode n >= 1: X[x][n][k].
  std::array<std::vector<Blocks>, 3> X;
  for (int x = 0; x < 3; ++x) {
    X[static_cast<size_t>(x)].assign(static_cast<size_t>(N + 1), Blocks(static_cast<size_t>(N + 1)));
    if (N >= 1)
      for (int k = 0; k <= N; ++k)
        X[static_cast<size_t>(x)][1][static_cast<size_t>(k)] =
            k >= 1 ? P[static_cast<size_t>(x)][static_cast<size_t>(k)] : MatrixXd(0, d(0));
  }
  auto xb = [&](int x, int n, int k) -> MatrixXd {
    if (k < 0 || k > N || k < n) return MatrixXd::Zero(d(k - n), d(k));
    const MatrixXd& b = X[static_cast<size_t>(x)][static_cast<size_t>(n)][static_cast<size_t>(k)];
    if (b.rows() != d(k - n) || b.cols() != d(k)) return MatrixXd::Zero(d(k - n), d(k));
    return b;
  };
  for (int n = 1; n < N; ++n)
    for (int k = n + 1; k <= N; ++k) {
      // e(n+1) = [h(1), e(n)]/2, f(n+1) = -[h(1), f(n)]/2, h(n+1) = [e(1), f(n)]
      MatrixXd E = (xb(1, 1, k - n) * xb(0, n, k) - xb(0, n, k - 1) * xb(1, 1, k)) / 2.0;
      MatrixXd F = -(xb(1, 1, k - n) * xb(2, n, k) - xb(2, n, k - 1) * xb(1, 1, k)) / 2.0;
      MatrixXd H = xb(0, 1, k - n) * xb(2, n, k) - xb(2, n, k - 1) * xb(0, 1, k);
      X[0][static_cast<size_t>(n + 1)][static_cast<size_t>(k)] = E;
      X[2][static_cast<size_t>(n + 1)][static_cast<size_t>(k)] = F;
      X[1][static_cast<size_t>(n + 1)][static_cast<size_t>(k)] = H;
    }

  m.x_ops.assign(3, std::vector<MatrixXd>(static_cast<size_t>(2 * N + 1)));
  for (int x = 0; x < 3; ++x) {
    MatrixXd zero = MatrixXd::Zero(m.total, m.total);
    for (int k = 0; k <= N; ++k)
      zero.block(m.offsets[static_cast<size_t>(k)], m.offsets[static_cast<size_t>(k)], d(k), d(k)) =
          Z[static_cast<size_t>(x)][static_cast<size_t>(k)];
    m.x_ops[static_cast<size_t>(x)][static_cast<size_t>(N)] = zero;
  }
  for (int n = 1; n <= N; ++n)
    for (int x = 0; x < 3; ++x) {
      Blocks b(static_cast<size_t>(N + 1));
      for (int k = 0; k <= N; ++k) b[static_cast<size_t>(k)] = xb(x, n, k);
      m.x_ops[static_cast<size_t>(x)][static_cast<size_t>(N + n)] = dense_from_blocks(m, b, n);
    }
  for (int n = 1; n <= N; ++n)
    for (int x = 0; x < 3; ++x)
      m.x_ops[static_cast<size_t>(x)][static_cast<size_t>(N - n)] =
          m.x_ops[static_cast<size_t>(dag(x))][static_cast<size_t>(N + n)].transpose();
}

}  // namespace

GradedModule unitarize(const Verma& v, const UnitarizeOptions& opt) {
  GradedModule m;
  m.spec = v.spec;
  if (v.spec.kind == ModuleKind::Virasoro)
    unitarize_virasoro(m, opt);
  else
    unitarize_affine(m, opt);
  return m;
}

std::vector<MatrixXd> sugawara(const GradedModule& m, int ell) {
  if (!m.is_affine()) throw KindMismatch("sugawara: module is not affine");
  if (ell + 2 == 0) throw ValidationError("sugawara: l + h^vee must be nonzero");
  const int N = m.N();
  const double pref = 1.0 / (2.0 * (ell + 2.0));
  std::vector<MatrixXd> L(static_cast<size_t>(2 * N + 1));
  for (int n = 0; n <= N; ++n) {
    MatrixXd acc = MatrixXd::Zero(m.total, m.total);
    // Normal-ordered: larger mode on the right; p ranges over p > n/2.
    for (int p = n / 2 + 1; p <= N; ++p) {
      if (2 * p <= n) continue;
      for (int i = 0; i < 3; ++i)
        acc.noalias() += 2.0 * kDualScale[i] * m.x(i, n - p) * m.x(kDualGen[i], p);
    }
    if (n % 2 == 0)
      for (int i = 0; i < 3; ++i) acc.noalias() += kDualScale[i] * m.x(i, n / 2) * m.x(kDualGen[i], n / 2);
    L[static_cast<size_t>(N + n)] = pref * acc;
  }
  for (int n = 1; n <= N; ++n) L[static_cast<size_t>(N - n)] = L[static_cast<size_t>(N + n)].transpose();
  return L;
}

ModulePtr build_module(const HighestWeightSpec& spec, const UnitarizeOptions& opt) {
  spec.validate();
  GradedModule m;
  m.spec = spec;
  if (spec.kind == ModuleKind::Virasoro) {
    unitarize_virasoro(m, opt);
  } else {
    unitarize_affine(m, opt);
    m.l_ops = sugawara(m, spec.ell);
    m.has_virasoro = true;
  }
  return std::make_shared<const GradedModule>(std::move(m));
}

// ---------------------------------------------------------------------------
// Representation of algebra elements

MatrixXcd assemble_pi(const GradedModule& m, const CentralElement& x) {
  MatrixXcd out = MatrixXcd::Zero(m.total, m.total);
  if (x.kind == AlgebraKind::Loop && !m.is_affine())
    throw KindMismatch("assemble_pi: loop element on a Virasoro module");
  for (const auto& [n, a] : x.vect.coeffs) {
    if (a == cplx{}) continue;
    out += (I_UNIT * a) * m.L(n).cast<cplx>();
  }
  if (x.kind == AlgebraKind::Loop) {
    for (const auto& [n, v] : x.loop.coeffs)
      for (int i = 0; i < 3; ++i)
        if (v[static_cast<size_t>(i)] != cplx{}) out += v[static_cast<size_t>(i)] * m.x(i, n).cast<cplx>();
    out.diagonal().array() += x.central * m.ell_value + x.central_vir * m.c_value;
  } else {
    out.diagonal().array() += x.central * m.c_value;
  }
  return out;
}

cplx representation_cocycle(const GradedModule& m, const CentralElement& x, const CentralElement& y) {
  CentralElement b = central_bracket(x, y);
  cplx z = x.kind == AlgebraKind::Loop ? b.central * m.ell_value + b.central_vir * m.c_value
                                       : b.central * m.c_value;
  return -I_UNIT * z;
}

double virasoro_relation_residual(const GradedModule& m, int max_mode) {
  double worst = 0;
  for (int a = -max_mode; a <= max_mode; ++a)
    for (int b = -max_mode; b <= max_mode; ++b) {
      const int w = m.window_dim(m.N() - std::abs(a) - std::abs(b));
      if (w == 0) continue;
      MatrixXd c = m.L(a) * m.L(b).leftCols(w) - m.L(b) * m.L(a).leftCols(w) - (a - b) * m.L(a + b).leftCols(w);
      if (a + b == 0) c.topRows(w).diagonal().array() -= m.c_value * (a * a * a - a) / 12.0;
      worst = std::max(worst, c.norm());
    }
  return worst;
}

double current_relation_residual(const GradedModule& m, int max_mode) {
  const auto& g = *FiniteLieAlgebra::sl2();
  double worst = 0;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      for (int a = -max_mode; a <= max_mode; ++a)
        for (int b = -max_mode; b <= max_mode; ++b) {
          const int w = m.window_dim(m.N() - std::abs(a) - std::abs(b));
          if (w == 0) continue;
          MatrixXd c = m.x(x, a) * m.x(y, b).leftCols(w) - m.x(y, b) * m.x(x, a).leftCols(w);
          for (int z = 0; z < 3; ++z)
            if (g.f(x, y, z) != 0) c -= g.f(x, y, z).get_d() * m.x(z, a + b).leftCols(w);
          if (a + b == 0) c.topRows(w).diagonal().array() -= a * g.form(x, y).get_d() * m.ell_value;
          worst = std::max(worst, c.norm());
        }
  return worst;
}

double sugawara_current_residual(const GradedModule& m, int max_mode) {
  double worst = 0;
  for (int x = 0; x < 3; ++x)
    for (int a = -max_mode; a <= max_mode; ++a)
      for (int b = -max_mode; b <= max_mode; ++b) {
        const int w = m.window_dim(m.N() - std::abs(a) - std::abs(b));
        if (w == 0) continue;
        MatrixXd c = m.L(a) * m.x(x, b).leftCols(w) - m.x(x, b) * m.L(a).leftCols(w) + b * m.x(x, a + b).leftCols(w);
        worst = std::max(worst, c.norm());
      }
  return worst;
}

double extracted_central_charge(const GradedModule& m) {
  if (m.N() < 2) throw ValidationError("extracted_central_charge: needs N >= 2");
  const VectorXd omega = VectorXd::Unit(m.total, 0);
  const double g = omega.dot(m.L(2) * (m.L(-2) * omega));
  return 2.0 * (g - 4.0 * omega.dot(m.L(0) * omega));
}

Rational discrete_c(int mm) { return Rational(1) - frac(6, (mm + 2) * (mm + 3)); }

Rational discrete_h(int mm, int p, int q) {
  long a = static_cast<long>(mm + 3) * p - static_cast<long>(mm + 2) * q;
  return frac(a * a - 1, 4L * (mm + 2) * (mm + 3));
}

ModuleVector ModuleVector::vacuum(const ModulePtr& m) {
  ModuleVector v{m, VectorXcd::Zero(m->total)};
  v.coeffs(0) = 1.0;
  return v;
}

VectorXd ModuleVector::level_norms() const {
  VectorXd out(module->N() + 1);
  for (int k = 0; k <= module->N(); ++k)
    out(k) = coeffs.segment(module->offsets[static_cast<size_t>(k)], module->dims[static_cast<size_t>(k)]).norm();
  return out;
}

double ModuleVector::top_mass(int levels) const { return top_level_mass(*module, coeffs, levels); }

double top_level_mass(const GradedModule& m, const VectorXcd& v, int levels) {
  const double total = v.squaredNorm();
  if (total == 0) return 0;
  const int start = m.window_dim(m.N() - levels);
  return v.tail(m.total - start).squaredNorm() / total;
}

}  // namespace lieexp
