#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace mmslam {

/// Entries at or above this value (including +inf) are not assignable.
inline constexpr double kForbiddenCost = 1e9;

class AssignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-to-column map of a rows x cols cost matrix (rows <= cols).
struct Assignment {
  std::vector<int> row_to_col;
  double cost = 0.0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Minimum-cost assignment of every row to a distinct column.
/// Throws AssignmentError("infeasible row") when no finite assignment exists.
Assignment solve_optimal(const Eigen::MatrixXd& cost);

/// The k cheapest distinct assignments in nondecreasing cost order, ties
/// broken lexicographically on the assignment vector. Returns fewer than k if
/// fewer feasible assignments exist.
std::vector<Assignment> murty_k_best(const Eigen::MatrixXd& cost, int k);

struct AssociationCosts {
  /// M x (J + M): existing Bernoullis, then one new-landmark column per row.
  Eigen::MatrixXd cost;
  /// Sum of the misdetection log-weights. A hypothesis' log-weight is
  /// `constant - assignment cost`.
  double constant = 0.0;
};

/// Builds the association cost matrix from log-weights:
///   log_detect(i, j)  log l^{j,i} for cluster i and Bernoulli j
///   log_miss(j)       log l^{j,0}
///   log_new(i)        log l_U^i
/// -inf log-weights become forbidden entries.
AssociationCosts build_cost_matrix(const Eigen::MatrixXd& log_detect,
                                   const Eigen::VectorXd& log_miss,
                                   const Eigen::VectorXd& log_new);

}  // namespace mmslam
