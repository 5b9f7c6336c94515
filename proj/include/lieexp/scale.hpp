#pragma once

// The Sobolev scale of A = 1 + L0 on a truncated module, the seminorm
// families used to state the estimates, and numerical checks of each
// estimate. Checks report both sides; they never throw on violation.

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "lieexp/hwmod.hpp"

namespace lieexp {

class SobolevScale {
 public:
  explicit SobolevScale(const GradedModule& m) : a_(m.a_diagonal()) {}
  explicit SobolevScale(VectorXd a_diag) : a_(std::move(a_diag)) {}

  [[nodiscard]] const VectorXd& a() const { return a_; }
  [[nodiscard]] VectorXd power(double t) const { return a_.array().pow(t); }
  /// ||A^t xi||.
  [[nodiscard]] double norm(const VectorXcd& xi, double t) const;
  /// ||A^s M A^{-t}|| as a map H^t -> H^s (largest singular value).
  [[nodiscard]] double operator_norm(const MatrixXcd& m, double s, double t) const;

 private:
  VectorXd a_;
};

double sobolev_norm(const ModuleVector& xi, double t);

enum class SeminormFamily { Plain, GWVirasoro, GWLoop };

/// |X|_s for one of the seminorm families.
///   Plain:       ||X||_s
///   GWVirasoro:  |X|_{n+1} = sqrt(2)||X||_n + M(||X||_{n+1} + ||X||_{n+3/2}), M = sqrt(c/12)
///   GWLoop:      |X + f d/dtheta|_{n+1} = (l+1)||X||_{n+1/2} + dim(g)||f||_{n+3/2}
/// The GW families read negative indices as |X|_{-n} = |X|_{n+1}; Plain is the
/// coefficient seminorm at every index.
struct Seminorm {
  SeminormFamily family = SeminormFamily::Plain;
  double c = 0;
  double ell = 0;
  int dim_g = 3;

  static Seminorm for_module(const GradedModule& m);

  [[nodiscard]] double operator()(const CentralElement& x, double index) const;
  /// |X|_{A, index} = |[L_0, X]|_index.
  [[nodiscard]] double a_norm(const CentralElement& x, double index) const;
  [[nodiscard]] std::string name() const;
};

struct EstimateRow {
  std::string estimate;
  nlohmann::json params;
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
  double leakage = 0;  // top-level mass of the vectors involved (0 inside the safe window)

  [[nodiscard]] nlohmann::json to_json() const;
};

/// lhs <= rhs with a relative slack for round-off.
bool estimate_holds(double lhs, double rhs);

std::string rows_to_csv(const std::vector<EstimateRow>& rows);

/// ||pi(X) xi||_n <= |X|_{n+1} ||xi||_{n+1} and
/// ||[A, pi(X)] xi||_n <= |X|_{A,n+1} ||xi||_{n+1}.
std::vector<EstimateRow> check_basic_estimates(const GradedModule& m, const CentralElement& x,
                                               const VectorXcd& xi, double n, const Seminorm& norm);

/// Goodman-Wallach estimate for fields, three-term form.
EstimateRow check_gw_virasoro(const GradedModule& m, const CentralElement& x, const VectorXcd& xi, double t);

/// Loop estimate and field estimate on an affine module (rows "gw-loop", "gw-loop-field").
std::vector<EstimateRow> check_gw_loop(const GradedModule& m, const LoopElement& x, const VectField& f,
                                       const VectorXcd& xi, double t);

/// ||A^n e^{pi(X)} A^{-n}|| <= e^{2n |X|_{A,n}}.
EstimateRow check_exp_estimate(const GradedModule& m, const CentralElement& x, double n, const Seminorm& norm);

/// ||e^{pi(X)}xi - e^{pi(Y)}xi||_n <= |X-Y|_{n+1} e^{2(n+1)max(|X|_{A,n+1},|Y|_{A,n+1})} ||xi||_{n+1}.
EstimateRow check_exp_difference(const GradedModule& m, const CentralElement& x, const CentralElement& y,
                                 const VectorXcd& xi, double n, const Seminorm& norm);

// Random samples for the checks. All draw from the supplied engine only.
using Rng = std::mt19937_64;

/// Unit vector supported on levels <= max_level with Gaussian coefficients.
VectorXcd random_vector(const GradedModule& m, int max_level, Rng& rng);
/// Random real field with modes |n| <= degree, coefficients of size ~ scale.
VectField random_real_field(int degree, double scale, Rng& rng);
/// Random real loop element over sl2 with modes |n| <= degree.
LoopElement random_real_loop(int degree, double scale, Rng& rng);

}  // namespace lieexp
