#pragma once

// Dense helpers shared by the numerical modules.

#include <functional>

#include <Eigen/Dense>

#include "lieexp/numeric.hpp"

namespace lieexp {

/// Matrix exponential (Pade scaling and squaring).
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a);
/// Largest singular value.
double opnorm(const Eigen::MatrixXcd& a);
/// exp(dt * S) v by a scaled Taylor series on the vector kernels.
Eigen::VectorXcd expm_action(const Eigen::MatrixXcd& s, double dt, const Eigen::VectorXcd& v);
/// exp(S) v where apply(x, y) sets y = S x and norm_bound >= ||S||.
Eigen::VectorXcd expm_action(const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& apply,
                             double norm_bound, const Eigen::VectorXcd& v);
/// ||U^dagger U - I|| (largest singular value).
double unitarity_defect(const Eigen::MatrixXcd& u);

}  // namespace lieexp
