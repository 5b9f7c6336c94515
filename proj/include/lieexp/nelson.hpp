#pragma once

// Finite-dimensional testbed on su(2): direct sums of spin representations,
// the Laplacian and A = 1 - Delta, and exponentiation against closed forms.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lieexp/prodint.hpp"

namespace lieexp {

using Eigen::Vector3d;

/// Direct sum of spin-j irreps; spins are stored as 2j. pi(X_k) = -i J_k, so
/// [pi(X_1), pi(X_2)] = pi(X_3) cyclically.
struct FinDimRep {
  std::vector<int> two_j;
  std::vector<int> offsets;
  int dim = 0;
  std::array<MatrixXcd, 3> X;

  static FinDimRep make(std::vector<int> two_j);
  /// pi(c_1 X_1 + c_2 X_2 + c_3 X_3).
  [[nodiscard]] MatrixXcd pi(const Vector3d& c) const;
  /// max || [pi(X_i), pi(X_j)] - pi([X_i, X_j]) || and skew-hermiticity defect.
  [[nodiscard]] double commutation_residual() const;
  [[nodiscard]] double skew_residual() const;
};

/// Delta = sum pi(X_k)^2 and A = 1 - Delta.
MatrixXcd laplacian(const FinDimRep& r);
MatrixXcd scale_operator(const FinDimRep& r);
/// Diagonal of A (A is block-scalar, 1 + j(j+1) on a spin-j block).
VectorXd scale_diagonal(const FinDimRep& r);

struct AssumptionRow {
  int basis = 0;          // k in X_k
  int n = 0;
  double pi_constant = 0;   // ||A^n pi(X) A^{-n-1}||, smallest |X|_{n+1}
  double comm_constant = 0; // ||A^n [A, pi(X)] A^{-n-1}||, smallest |X|_{A,n+1}
};

/// Smallest constants for the two estimates on the basis, n = 0..n_max.
std::vector<AssumptionRow> verify_assumptions(const FinDimRep& r, int n_max = 4, double scale = 1.0);

/// su(2)-valued path t -> (c_1, c_2, c_3)(t).
struct Su2Path {
  std::function<Vector3d(double)> at;
  double a = 0.0;
  double b = 1.0;
  bool constant = false;

  static Su2Path constant_path(const Vector3d& c, double a = 0.0, double b = 1.0);
  /// cos(w t) X_1 + sin(w t) X_2.
  static Su2Path rotating_axis(double w);
};

OperatorPath to_operator_path(const FinDimRep& r, const Su2Path& p);

/// exp(angle * axis . pi(X)) per block by Lagrange-Sylvester interpolation on
/// the eigenvalues -i m of the block (no matrix exponential involved).
MatrixXcd axis_angle(const FinDimRep& r, const Vector3d& axis, double angle);

/// Closed form for the rotating axis path on [0, t]:
/// U(t) = e^{t w pi(X_3)} e^{t pi(X_1 - w X_3)}, exponentials by axis_angle.
MatrixXcd rotating_axis_closed_form(const FinDimRep& r, double w, double t);

/// Classical RK4 on U' = pi(X(t)) U with `steps` uniform steps.
MatrixXcd reference_propagator(const FinDimRep& r, const Su2Path& p, int steps);

/// (axis, angle) with U = exp(angle axis . pi(X)) on spin 1/2; angle in [0, 2 pi].
std::pair<Vector3d, double> su2_log(const Eigen::Matrix2cd& u);

struct NelsonReport {
  double axis_angle_residual = 0;     // constant path vs closed form
  double rotating_residual = 0;       // rotating axis vs closed form
  double reference_residual = 0;      // rotating axis vs RK4 reference
  double path_independence = 0;       // two paths to the same element
  double homomorphism = 0;            // concatenation residual
  double unitarity = 0;               // max ||U^* U - I||
  double determinant = 0;             // max | |det block| - 1 |
  double full_turn = 0;               // ||U(2 pi X_3) + Id|| on spin 1/2 blocks
};

struct NelsonOptions {
  double tol = 1e-12;
  double omega = 2.0;
  int reference_steps = 4000;
  int concatenations = 4;
  std::uint64_t seed = 1;
};

NelsonReport exponentiate_vs_oracle(const FinDimRep& r, const NelsonOptions& opt = {});

}  // namespace lieexp
