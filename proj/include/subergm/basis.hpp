#pragma once

#include <vector>

#include <Eigen/Dense>

#include "subergm/errors.hpp"

#include <nlohmann/json_fwd.hpp>

namespace subergm {

// Basis of scaled exponential CDFs B_q(x) = 1 - exp(-gamma_q x) on x >= 0.
// Every member is bounded by 1, increasing, and 0 at the origin, so any
// coefficient vector u gives an effect m(x) = B(x)'u with m(0) = 0 and
// sup |m| <= sum |u_q|. Monotonicity is enforced through the derivative
// sign at the cutpoints, the points where neighboring basis derivatives
// cross; between consecutive cutpoints a single basis function dominates.
struct ExpBasis {
  int K = 0;
  Eigen::VectorXd gammas;     // ascending rates
  Eigen::VectorXd cutpoints;  // cutpoints(r) is where B'_r and B'_{r+1} cross

  Eigen::VectorXd values(double x) const;  // B(x)
  Eigen::VectorXd derivs(double x) const;  // B'(x)

  // Rows B(x_r)' for a vector of evaluation points.
  Eigen::MatrixXd design(const Eigen::VectorXd& xs) const;

  double effect(double x, const Eigen::VectorXd& u) const;
};

// Geometric rate ladder gamma_min, ..., gamma_max with K rungs.
ExpBasis build_basis(int K = 20, double gamma_min = 5e-4, double gamma_max = 1.0);

nlohmann::json basis_to_json(const ExpBasis& b);
ExpBasis basis_from_json(const nlohmann::json& j);

// Linear monotonicity constraints for a p-effect model with coefficient
// layout (theta0, u_1, ..., u_p): for each effect l and cutpoint r,
//   sign_l * B'(xi_r)' u_l >= 0.
// The intercept column is zero, so A beta >= 0 never restricts theta0.
struct ConstraintMatrix {
  Eigen::MatrixXd A;       // p*(K-1) rows, 1 + p*K columns
  std::vector<int> signs;  // +1 increasing, -1 decreasing, one per effect
};

ConstraintMatrix constraint_matrix(const ExpBasis& b, const std::vector<int>& signs);

}  // namespace subergm
