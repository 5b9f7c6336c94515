#pragma once

// Truncated highest-weight modules: Virasoro (c, h) and affine sl2 at level
// l over the irreducible sl2 module of highest weight lambda. Levels 0..N are
// retained; every generator is stored as the compression P pi P to those
// levels in an orthonormal basis.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lieexp/liealg.hpp"

namespace lieexp {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

enum class ModuleKind { Virasoro, AffineSL2 };

struct HighestWeightSpec {
  ModuleKind kind = ModuleKind::Virasoro;
  Number c = Number(Rational(1, 2));
  Number h = Number(Rational(1, 16));
  int ell = 1;     // affine level
  int lambda = 0;  // dominant integral sl2 weight, 0 <= lambda <= ell
  int N = 8;

  static HighestWeightSpec virasoro(Number c, Number h, int N);
  static HighestWeightSpec affine(int ell, int lambda, int N);

  void validate() const;
  /// Stable text form used for cache keys.
  [[nodiscard]] std::string canonical() const;
};

// ---------------------------------------------------------------------------
// Verma module and Shapovalov form

/// A PBW monomial y_1(-n_1) ... y_r(-n_r) applied to the lowest space.
/// Factors are stored leftmost first with n nonincreasing and, for equal n,
/// generator index nondecreasing (e < h < f). Affine monomials may end in
/// f(0)^a (stored as factors with n = 0), a <= lambda.
struct PBWMonomial {
  std::vector<std::pair<int, int>> factors;  // (generator, n)

  [[nodiscard]] int level() const;
  [[nodiscard]] std::string to_string(ModuleKind kind) const;
  friend bool operator<(const PBWMonomial& a, const PBWMonomial& b) { return a.factors < b.factors; }
  friend bool operator==(const PBWMonomial& a, const PBWMonomial& b) { return a.factors == b.factors; }
};

/// Reduction engine for generator words applied to the highest-weight
/// vector. T is Rational (exact) or double.
template <class T>
class VermaEngine {
 public:
  using Vec = std::map<PBWMonomial, T>;

  explicit VermaEngine(const HighestWeightSpec& spec);

  [[nodiscard]] const HighestWeightSpec& spec() const { return spec_; }
  [[nodiscard]] int num_generators() const { return spec_.kind == ModuleKind::Virasoro ? 1 : 3; }
  [[nodiscard]] const std::vector<PBWMonomial>& basis(int level) const {
    return basis_.at(static_cast<size_t>(level));
  }
  [[nodiscard]] std::vector<int> level_dims() const;

  /// Generator `gen` with mode m applied to a monomial, reduced to canonical form.
  const Vec& apply(int gen, int m, const PBWMonomial& w);
  Vec apply(int gen, int m, const Vec& v);

  /// Shapovalov form <w, w'> (real, symmetric).
  T inner(const PBWMonomial& a, const PBWMonomial& b);
  std::vector<std::vector<T>> gram(int level);

 private:
  void add_bracket(Vec& out, int x, int m, int y, int n, const PBWMonomial& rest, const T& coeff);
  int dagger(int gen) const;

  HighestWeightSpec spec_;
  T c_{}, h_{};
  std::vector<std::vector<PBWMonomial>> basis_;
  std::map<std::tuple<int, int, PBWMonomial>, Vec> apply_cache_;
  std::map<std::pair<PBWMonomial, PBWMonomial>, T> inner_cache_;
};

extern template class VermaEngine<Rational>;
extern template class VermaEngine<double>;

struct Verma {
  HighestWeightSpec spec;
  std::vector<std::vector<PBWMonomial>> basis;  // per level
  std::shared_ptr<VermaEngine<Rational>> exact;  // set when c and h are exact
  std::shared_ptr<VermaEngine<double>> floating;

  [[nodiscard]] std::vector<int> level_dims() const;
};

Verma build_verma(const HighestWeightSpec& spec);

/// Gram matrix at one level, in doubles. gram_matrix_exact requires exact weights.
MatrixXd gram_matrix(const Verma& v, int level);
std::vector<std::vector<Rational>> gram_matrix_exact(const Verma& v, int level);

/// Exact positive-semidefiniteness test by symmetric-pivoted LDL^T over Q.
/// Returns the rank; sets *negative when a negative pivot appears.
int exact_psd_rank(std::vector<std::vector<Rational>> g, bool* negative);

// ---------------------------------------------------------------------------
// Unitarized graded module

struct UnitarizeOptions {
  double tol_psd = 1e-9;   // relative to the Gram norm
  double tol_null = 1e-8;  // relative to the Gram norm
};

class GradedModule {
 public:
  HighestWeightSpec spec;
  std::vector<int> dims;     // per level
  std::vector<int> offsets;  // start index of each level
  int total = 0;
  double h0 = 0;             // lowest L0 eigenvalue
  double c_value = 0;        // value of kappa (Sugawara charge for affine)
  double ell_value = 0;      // value of k (affine only)
  double l0_shift = 0;       // Sugawara L0 minus the grading derivation (affine)
  std::vector<int> null_counts;  // per level, vectors quotiented out

  [[nodiscard]] int N() const { return static_cast<int>(dims.size()) - 1; }
  [[nodiscard]] bool is_affine() const { return spec.kind == ModuleKind::AffineSL2; }
  [[nodiscard]] int level_of(int index) const;

  /// Full dense operators. L(n) is the Virasoro (or Sugawara) generator,
  /// x(gen, n) the affine current. Modes outside [-N, N] are zero.
  [[nodiscard]] const MatrixXd& L(int n) const;
  [[nodiscard]] const MatrixXd& x(int gen, int n) const;
  /// Block of an operator between two levels.
  [[nodiscard]] MatrixXd block(const MatrixXd& op, int to_level, int from_level) const;

  /// Diagonal of L0 (grading; equals the Sugawara L0 for affine modules).
  [[nodiscard]] VectorXd l0_diagonal() const;
  /// Diagonal of A = 1 + L0.
  [[nodiscard]] VectorXd a_diagonal() const;
  /// Orthogonal projection onto levels <= j (as a 0/1 diagonal).
  [[nodiscard]] VectorXd window(int j) const;
  /// Number of basis vectors in levels <= j.
  [[nodiscard]] int window_dim(int j) const;

  // Storage; filled by unitarize / sugawara / deserialization.
  std::vector<MatrixXd> l_ops;                  // index n + N
  std::vector<std::vector<MatrixXd>> x_ops;     // [gen][n + N]
  bool has_virasoro = false;

 private:
  MatrixXd zero_;
};

using ModulePtr = std::shared_ptr<const GradedModule>;

GradedModule unitarize(const Verma& v, const UnitarizeOptions& opt = {});
/// Builds the Verma data and unitarizes; adds Sugawara generators for affine.
ModulePtr build_module(const HighestWeightSpec& spec, const UnitarizeOptions& opt = {});

/// Sugawara generators L_n, |n| <= N, on an affine module.
std::vector<MatrixXd> sugawara(const GradedModule& m, int ell);

/// pi(X) as a dense complex matrix: e_n -> i L_n, x(n) -> x(n),
/// central coefficient z -> z * (c or l) * Id.
MatrixXcd assemble_pi(const GradedModule& m, const CentralElement& x);

/// Real cocycle B(X, Y) with [pi(X), pi(Y)] = pi([X,Y]) + i B(X,Y).
cplx representation_cocycle(const GradedModule& m, const CentralElement& x, const CentralElement& y);

/// Frobenius residuals of the defining relations on the safe window: for the
/// pair (a, b) only columns in levels <= N - |a| - |b| are compared. The max
/// is over |a|, |b| <= max_mode.
///   Virasoro: [L_a, L_b] - (a-b) L_{a+b} - delta_{a+b,0} c (a^3-a)/12
///   currents: [x(a), y(b)] - [x,y](a+b) - a delta_{a+b,0} <x,y> l
///   mixed:    [L_a, x(b)] + b x(a+b)
double virasoro_relation_residual(const GradedModule& m, int max_mode);
double current_relation_residual(const GradedModule& m, int max_mode);
double sugawara_current_residual(const GradedModule& m, int max_mode);
/// 2(<Omega, L_2 L_{-2} Omega> - 4 <Omega, L_0 Omega>), the central charge read off level 2.
double extracted_central_charge(const GradedModule& m);

/// Discrete-series formulas c(m), h_{p,q}(m).
Rational discrete_c(int m);
Rational discrete_h(int m, int p, int q);

/// Vector in the module's orthonormal basis.
struct ModuleVector {
  ModulePtr module;
  VectorXcd coeffs;

  static ModuleVector vacuum(const ModulePtr& m);
  [[nodiscard]] VectorXd level_norms() const;
  /// Fraction of squared norm in the top `levels` levels.
  [[nodiscard]] double top_mass(int levels = 2) const;
};

/// Leakage: squared-norm fraction of v in the top `levels` levels.
double top_level_mass(const GradedModule& m, const VectorXcd& v, int levels = 2);

}  // namespace lieexp
