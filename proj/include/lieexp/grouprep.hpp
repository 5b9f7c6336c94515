#pragma once

// Exponentiation of group paths: logarithmic derivatives of circle
// diffeomorphism families, U_p and its properties, flat sections over the
// square, holonomy phases, and the phase chart of the projective extension.

#include <functional>
#include <string>
#include <vector>

#include "lieexp/hwmod.hpp"
#include "lieexp/prodint.hpp"

namespace lieexp {

/// phi(t, theta) = theta + u(t, theta), u 2pi-periodic in theta, u(0, .) = 0.
struct DiffeoFamily {
  std::function<double(double, double)> u;
  std::function<double(double, double)> u_theta;
  std::function<double(double, double)> u_t;
  double a = 0.0;
  double b = 1.0;
};

/// phi(t, theta) = theta + 2 pi s t.
DiffeoFamily rigid_rotation(double turns = 1.0);
/// phi(t, theta) = theta + t eps sin(theta); monotone for |t eps| < 1.
DiffeoFamily sine_family(double eps);
/// t -> phi(t, g(theta)) with g(theta) = theta + v(theta).
DiffeoFamily right_translate(const DiffeoFamily& f, std::function<double(double)> v,
                             std::function<double(double)> v_theta);

struct LogDerivativeOptions {
  int log2_points = 6;     // 2^k point theta grid
  int max_degree = 8;      // modes kept after the fit
  double prune = 1e-14;    // drop coefficients below this
};

/// X(t)(theta) = d_t phi(t, phi_t^{-1}(theta)) d/dtheta, fitted spectrally.
/// Throws NonMonotone when 1 + u_theta <= 0 at some grid node; 65 sample times are
/// scanned at construction and every evaluation checks again.
GeneratorPath log_derivative(const DiffeoFamily& family, const LogDerivativeOptions& opt = {});
/// Generator paths pass through unchanged.
inline GeneratorPath log_derivative(const GeneratorPath& p) { return p; }

/// U_p = product integral of the generator path over its interval.
Propagator exponentiate_path(const GradedModule& m, const GeneratorPath& path, const ProductIntegralOptions& opt = {});

struct PropertyRow {
  std::string property;
  double residual = 0;
};

/// Residuals of the U_p properties for a generator path on [0, 1]:
/// lifting (constant generator `lift`), reparametrisation by sigma^2,
/// factorisation at 1/2 and inversion. Translation invariance is checked
/// separately in generator form (translation_residual).
std::vector<PropertyRow> verify_up_properties(const GradedModule& m, const GeneratorPath& path,
                                              const CentralElement& lift, const ProductIntegralOptions& opt = {});

/// max over sample times of |X_{pg}(t) - X_p(t)| (plain seminorm of index 0).
double translation_residual(const DiffeoFamily& f, std::function<double(double)> v,
                            std::function<double(double)> v_theta, const LogDerivativeOptions& opt = {});

// ---------------------------------------------------------------------------
// Homotopies, flat sections, holonomy

/// X_1(x, y), X_2(x, y) on the unit square with optional partial derivatives
/// d1x2 = d_x X_2 and d2x1 = d_y X_1 (finite differences when absent).
struct FlatHomotopy {
  std::function<CentralElement(double, double)> x1;
  std::function<CentralElement(double, double)> x2;
  std::function<CentralElement(double, double)> d1x2;
  std::function<CentralElement(double, double)> d2x1;
};

/// H(x, y) = exp(alpha Q1) exp(beta Q2) with Q1 = e_m + e_{-m},
/// Q2 = i(e_m - e_{-m}), alpha = a1 x, beta = b1 x + kappa y sin(pi x).
/// X_2 vanishes on x in {0, 1}; m = 1 stays in the Moebius span.
FlatHomotopy sl2_flow_homotopy(int m, double a1, double b1, double kappa);

/// Y_1 = X_1, Y_2 = X_2 + (central) int_0^x B(X_1, X_2)(t, y) dt with the
/// central part acting as i times the integral. Y is flat in the extended sense.
FlatHomotopy extend_homotopy(const GradedModule& m, const FlatHomotopy& h, int quad_intervals = 64);

/// Curvature residual seminorm of d1 X2 - d2 X1 - [X1, X2] at (x, y). With
/// `extended` the central parts enter too (the flatness the flat-section
/// construction needs); without it only the algebra part is compared.
double curvature_residual(const FlatHomotopy& h, double x, double y, bool extended);

struct FlatSection {
  std::vector<double> x, y;
  std::vector<std::vector<VectorXcd>> F;  // F[i][j] = F(x_i, y_j)
  double residual_x = 0;  // relative residual of d_x F = pi(X_1) F on interior nodes
  double residual_y = 0;  // relative residual of d_y F = pi(X_2) F
  double curvature = 0;   // max extended curvature residual on the grid
};

/// F(x, y) = prod_{y..0} Exp(X_2(x, v) dv) prod_{x..0} Exp(X_1(u, 0) du) xi0.
/// Throws CurvatureTooLarge when the extended curvature exceeds `max_curvature`.
FlatSection flat_section(const GradedModule& m, const FlatHomotopy& h, const VectorXcd& xi0, int nx, int ny,
                         double max_curvature = 1e-6, int substeps = 4);

struct HolonomyOptions {
  int window_level = 4;          // scalar read-out on levels <= this
  double tol = 1e-10;            // product-integral tolerance
  double quad_tol = 1e-12;       // Simpson doubling stop
  double max_curvature = 1e-6;
  double boundary_tol = 1e-12;
};

struct HolonomyResult {
  double integral = 0;      // int int B(X_1, X_2)
  cplx predicted;           // e^{i integral}
  cplx measured;            // trace of the window block / dimension
  double deviation = 0;     // || W_window - measured Id ||
  double error = 0;         // |measured - predicted|
  int sign = 1;             // +1 if measured sits nearer e^{+i integral} than e^{-i integral}
  int window_dim = 0;
  long steps0 = 0, steps1 = 0;
};

/// Compares prod Exp(X_1(t,1)dt) prod Exp(X_1(t,0)dt)^{-1} with e^{i int B}.
HolonomyResult holonomy_phase(const GradedModule& m, const FlatHomotopy& h, const HolonomyOptions& opt = {});

/// 2D composite Simpson of B(X_1, X_2) over the square, doubled until stable.
double cocycle_integral(const GradedModule& m, const FlatHomotopy& h, double quad_tol = 1e-12);

// ---------------------------------------------------------------------------
// Phase chart and the local multiplication

/// (U xi, xi) / |(U xi, xi)|; OutsideChart when |(U xi, xi)| <= 1e-12.
cplx phase_function(const VectorXcd& xi, const MatrixXcd& u);

/// phase(U_g U_h) / (phase(U_g) phase(U_h)).
cplx local_cocycle(const VectorXcd& xi, const MatrixXcd& ug, const MatrixXcd& uh);

struct ExtensionCocycleResult {
  double finite_difference = 0;  // antisymmetrised mixed derivative of arg local_cocycle
  double expected = 0;           // B(Y, X) - i (pi([Y, X]) xi, xi)
  double cocycle_part = 0;       // B(Y, X)
  double coboundary_part = 0;    // -i (pi([Y, X]) xi, xi)
  double error = 0;
  double step = 0;
};

/// Mixed central difference in (s, t) of arg local_cocycle(e^{s pi(Y)}, e^{t pi(X)})
/// minus the same with the group order swapped.
ExtensionCocycleResult extension_cocycle_check(const GradedModule& m, const VectorXcd& xi, const CentralElement& x,
                                               const CentralElement& y, double step = 1e-3);

}  // namespace lieexp
