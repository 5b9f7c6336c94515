#pragma once

// Product integrals (time-ordered exponentials) of operator paths on a
// truncated module, with dyadic refinement, the homogeneous and
// inhomogeneous equations, Gateaux derivatives and Dyson sums.
//
// Ordering: later times act on the left. A subdivision a = t_0 < ... < t_n = b
// gives U = E_n ... E_1 with E_j the factor of [t_{j-1}, t_j].

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lieexp/hwmod.hpp"
#include "lieexp/liealg.hpp"
#include "lieexp/scale.hpp"

namespace lieexp {

/// t -> X(t) on [a, b]. `at` must be pure. `derivative` is optional.
struct GeneratorPath {
  std::function<CentralElement(double)> at;
  double a = 0.0;
  double b = 1.0;
  int degree = 0;          // bound on the mode support
  bool constant = false;   // X(t) does not depend on t
  bool smooth = true;
  std::function<CentralElement(double)> derivative;

  static GeneratorPath constant_path(const CentralElement& x, double a = 0.0, double b = 1.0);
  /// t -> -X(a + b - t): the inverse product integral.
  [[nodiscard]] GeneratorPath inverse() const;
  /// t -> s X(t).
  [[nodiscard]] GeneratorPath scaled(double s) const;
  /// Same path on a sub-interval.
  [[nodiscard]] GeneratorPath restricted(double a2, double b2) const;
};

/// cos(t)(e_1 + e_{-1}) + sin(t) i(e_1 - e_{-1}) on [a, b].
GeneratorPath oscillatory_path(double a = 0.0, double b = 1.0);

/// t -> pi(X(t)) as a dense matrix; the form every integrator consumes.
struct OperatorPath {
  std::function<MatrixXcd(double)> at;
  double a = 0.0;
  double b = 1.0;
  bool constant = false;

  static OperatorPath from(const GradedModule& m, const GeneratorPath& p);
  [[nodiscard]] Eigen::Index dim() const { return at(a).rows(); }
};

enum class SampleRule {
  Left,      // canonical step function, first order
  Midpoint,  // second order, non-canonical
  Magnus4    // two-point Gauss Magnus, fourth order, non-canonical
};

std::string to_string(SampleRule r);
SampleRule sample_rule_from_string(const std::string& s);

struct StepSubdivision {
  std::vector<double> tau;  // strictly increasing breakpoints
  SampleRule rule = SampleRule::Left;

  static StepSubdivision uniform(double a, double b, long n, SampleRule rule = SampleRule::Left);
  void validate() const;
};

struct RefinementLevel {
  long steps = 0;        // the finer of the two compared step counts
  double difference = 0; // ||A^r (U_{2n} - U_n) A^{-r-1}|| (probe or dense)
  double bound = std::numeric_limits<double>::quiet_NaN();
  bool dense = false;
};

struct Propagator {
  MatrixXcd U;
  double a = 0.0;
  double b = 1.0;
  long steps = 0;
  SampleRule rule = SampleRule::Left;
  double refinement_error = 0.0;  // last difference, dense-verified
  double r = 0.0;                 // monitored norm index
  std::vector<RefinementLevel> history;
};

/// Ordered product of exponentials over the subdivision.
Propagator step_product(const OperatorPath& path, const StepSubdivision& sub);
Propagator step_product(const GradedModule& m, const GeneratorPath& path, const StepSubdivision& sub);

struct ProductIntegralOptions {
  double tol = 1e-8;
  double r = 0.0;                 // monitored norm index
  SampleRule rule = SampleRule::Magnus4;
  long initial_steps = 1;
  long max_steps = 1L << 20;
  bool dense_history = false;     // dense norm at every level, not only the last
  bool record_bound = false;      // Left rule only; needs a generator path
  std::optional<Seminorm> seminorm;  // defaults to the module's family
};

/// Dyadic refinement until successive propagators differ by < tol in the
/// H^{r+1} -> H^r norm. a_diag is the diagonal of A (empty: identity).
Propagator product_integral(const OperatorPath& path, const VectorXd& a_diag, const ProductIntegralOptions& opt = {});
Propagator product_integral(const GradedModule& m, const GeneratorPath& path, const ProductIntegralOptions& opt = {});

/// (b-a) sup_j |X(t_j + h/2) - X(t_j)|_{r+1} e^{2(r+1)(b-a) max |X|_{A,r+1}} for
/// the comparison of n and 2n left-rule steps.
double refinement_bound(const GeneratorPath& path, long n, double r, const Seminorm& norm);

// ---------------------------------------------------------------------------
// Trajectories

struct Trajectory {
  std::vector<double> t;
  std::vector<VectorXcd> xi;
  std::vector<double> leakage;  // top-2-level mass per node (0 without a module)

  [[nodiscard]] double max_leakage() const;
  /// max_t | ||xi(t)|| - ||xi(0)|| |.
  [[nodiscard]] double norm_drift() const;
};

std::vector<double> uniform_grid(double a, double b, int intervals);

struct TrajectoryOptions {
  int substeps = 4;                // Magnus4 steps per grid interval
  double leakage_limit = 1e-6;     // TruncationOverflow above this
  const GradedModule* module = nullptr;  // enables the leakage monitor
};

/// xi(t) = (product integral over [t_0, t]) xi0 on the grid.
Trajectory solve_homogeneous(const OperatorPath& path, const VectorXcd& xi0, const std::vector<double>& grid,
                             const TrajectoryOptions& opt = {});
Trajectory solve_homogeneous(const GradedModule& m, const GeneratorPath& path, const VectorXcd& xi0,
                             const std::vector<double>& grid, TrajectoryOptions opt = {});

/// J(t) = int_0^t U(t,s) eta(s) ds by cumulative Simpson on a uniform grid.
Trajectory solve_inhomogeneous(const OperatorPath& path, const std::vector<VectorXcd>& eta_on_grid,
                               const std::vector<double>& grid, const TrajectoryOptions& opt = {});
Trajectory solve_inhomogeneous(const OperatorPath& path, const std::function<VectorXcd(double)>& eta,
                               const std::vector<double>& grid, const TrajectoryOptions& opt = {});
Trajectory solve_inhomogeneous(const GradedModule& m, const GeneratorPath& path,
                               const std::function<VectorXcd(double)>& eta, const std::vector<double>& grid,
                               TrajectoryOptions opt = {});

/// First Gateaux derivative of I(X, xi0) in direction delta: the solution of
/// the inhomogeneous equation with source pi(delta) I(X, xi0).
Trajectory gateaux_derivative(const GradedModule& m, const GeneratorPath& path, const VectorXcd& xi0,
                              const GeneratorPath& delta, const std::vector<double>& grid,
                              TrajectoryOptions opt = {});

/// Cumulative integral of samples on a uniform grid (Simpson, 3/8 on odd tails).
std::vector<VectorXcd> cumulative_simpson(const std::vector<VectorXcd>& f, double h);

/// sum_{j<=k} h^j v_j(b), v_0 = xi0, v_j(t) = int_a^t pi(X(s)) v_{j-1}(s) ds.
VectorXcd dyson_expansion(const GradedModule& m, const GeneratorPath& path, const VectorXcd& xi0, int order,
                          double h, int intervals = 512);

/// max_i ||dxi/dt - pi(X) xi - eta||(t_i) / max_i ||pi(X) xi + eta||(t_i) over
/// interior nodes, derivative by central differences (fourth order on uniform grids). eta may be empty.
double equation_residual(const OperatorPath& path, const Trajectory& tr,
                         const std::vector<VectorXcd>& eta_on_grid = {});

std::string trajectory_to_csv(const Trajectory& tr, const GradedModule* m);

// ---------------------------------------------------------------------------
// Identities

/// Endpoint-preserving monotone reparametrisation phi: [a, b] -> [phi(a), phi(b)].
struct Reparametrization {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  double a = 0.0;
  double b = 1.0;
};

/// Path sigma -> phi'(sigma) X(phi(sigma)) on [a, b].
GeneratorPath reparametrize(const GeneratorPath& path, const Reparametrization& r);

/// ||prod over [phi(a), phi(b)] of X - prod over [a, b] of phi' X o phi||.
double change_of_variable_check(const GradedModule& m, const GeneratorPath& path, const Reparametrization& r,
                                const ProductIntegralOptions& opt = {});

/// ||U_{c..b} U_{b..a} - U_{c..a}|| with a < b < c inside the path interval.
double semigroup_residual(const GradedModule& m, const GeneratorPath& path, double mid,
                          const ProductIntegralOptions& opt = {});

/// ||U^{-1} - prod Exp(-X(a + b - tau) dtau)||.
double inversion_residual(const GradedModule& m, const GeneratorPath& path, const ProductIntegralOptions& opt = {});

}  // namespace lieexp
