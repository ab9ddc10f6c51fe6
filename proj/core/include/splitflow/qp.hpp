#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace splitflow::qp {

/// Dense strictly convex quadratic program
///   minimize   0.5 x'Gx + g'x
///   subject to Aeq x = beq,  Ain x >= bin.
struct Problem {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  Eigen::MatrixXd Aeq;
  Eigen::VectorXd beq;
  Eigen::MatrixXd Ain;
  Eigen::VectorXd bin;
};

struct Solution {
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Rows of Ain active at x.
  std::vector<int> active;
};

/// Goldfarb-Idnani dual active-set method. G must be positive definite.
/// Returns nullopt when the constraints are infeasible.
std::optional<Solution> solve(const Problem& problem);

}  // namespace splitflow::qp
