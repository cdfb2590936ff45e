#pragma once

#include <vector>

#include <Eigen/Dense>

#include "subergm/errors.hpp"

namespace subergm {

// Strictly convex quadratic program
//   min_b  0.5 b'Db - d'b   subject to   A b >= b0,
// with D symmetric positive definite and constraints as rows of A.
struct QpProblem {
  Eigen::MatrixXd D;
  Eigen::VectorXd d;
  Eigen::MatrixXd A;   // m x q, may have zero rows (m = 0)
  Eigen::VectorXd b0;  // m
};

struct QpSolution {
  Eigen::VectorXd b;
  Eigen::VectorXd multipliers;  // length m, zero for inactive constraints
  std::vector<int> active;      // indices of active constraints
  int iterations = 0;
  bool ridged = false;  // Cholesky needed the one-shot ridge bump
};

// Dual active-set method (Goldfarb-Idnani): starts from the unconstrained
// minimum, which is dual feasible, and adds violated constraints one at a
// time with partial steps that drop blocking constraints. Finite for
// positive definite D. If the Cholesky factorization fails, a ridge of
// 1e-10 * tr(D)/q is added once before giving up.
//
// warm_start, when nonempty, proposes an active set: the corresponding
// equality-constrained problem is solved directly and returned if it
// satisfies the KKT conditions; otherwise the cold solve runs as usual.
//
// Throws IndefiniteHessianError, InfeasibleError, or NumericError.
QpSolution solve_qp(const QpProblem& p, const std::vector<int>& warm_start = {});

// Max KKT residual of a proposed solution: stationarity, primal
// feasibility, nonnegativity, complementary slackness. Used by tests.
struct KktResidual {
  double stationarity = 0;
  double feasibility = 0;      // max(0, b0 - Ab)
  double multiplier_sign = 0;  // max(0, -mu)
  double complementarity = 0;  // max |mu_i (Ab - b0)_i|
};

KktResidual kkt_residual(const QpProblem& p, const QpSolution& s);

}  // namespace subergm
