#include "mmslam/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <utility>

namespace mmslam {

namespace {

bool forbidden(double c) { return !(c < kForbiddenCost); }

struct HungarianOut {
  std::vector<int> row_to_col;
  // Optimal duals: cost(i, j) - u[i] - v[j] >= 0, tight on every optimal
  // assignment.
  std::vector<double> u, v;
};

// Shortest augmenting path Hungarian method for rows <= cols. Forbidden
// entries are replaced by the sentinel; the caller checks feasibility.
HungarianOut hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  auto at = [&](int i, int j) {
    const double c = cost(i, j);
    return forbidden(c) ? kForbiddenCost : c;
  };

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<double> minv(m + 1);
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  HungarianOut out;
  out.row_to_col.assign(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) out.row_to_col[p[j] - 1] = j - 1;
  }
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  return out;
}

struct Solved {
  Assignment assignment;
  std::vector<double> u, v;
};

// Solves and validates; nullopt when infeasible.
std::optional<Solved> solve_once(const Eigen::MatrixXd& working, const Eigen::MatrixXd& original) {
  const auto rows = working.rows();
  if (rows == 0) return Solved{};
  if (rows > working.cols()) return std::nullopt;
  auto h = hungarian(working);
  Solved out{Assignment{std::move(h.row_to_col), 0.0}, std::move(h.u), std::move(h.v)};
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int j = out.assignment.row_to_col[i];
    if (j < 0 || forbidden(working(i, j))) return std::nullopt;
    out.assignment.cost += original(i, j);
  }
  return out;
}

void force(Eigen::MatrixXd& c, const Eigen::MatrixXd& original, int r, int col) {
  c.row(r).setConstant(kForbiddenCost);
  c.col(col).setConstant(kForbiddenCost);
  c(r, col) = original(r, col);
}

// Optimal assignment of `working`, lexicographically smallest among equal
// costs. Row by row, a smaller column is tried only where the optimal duals
// say it can be part of an optimum, and kept when the re-solve confirms it.
std::optional<Assignment> try_solve(const Eigen::MatrixXd& working, const Eigen::MatrixXd& original) {
  auto best = solve_once(working, original);
  if (!best) return std::nullopt;
  const auto rows = working.rows();
  double scale = 1.0;
  for (Eigen::Index i = 0; i < working.size(); ++i) {
    if (!forbidden(working.data()[i])) scale = std::max(scale, std::abs(working.data()[i]));
  }
  const double tol = 1e-9 * scale;

  Eigen::MatrixXd fixed = working;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int current = best->assignment.row_to_col[r];
    for (int j = 0; j < current; ++j) {
      if (forbidden(fixed(r, j))) continue;
      if (fixed(r, j) - best->u[r] - best->v[j] > tol) continue;
      Eigen::MatrixXd trial = fixed;
      force(trial, original, static_cast<int>(r), j);
      auto alt = solve_once(trial, original);
      if (alt && alt->assignment.cost <= best->assignment.cost + tol) {
        best = std::move(alt);
        break;
      }
    }
    force(fixed, original, static_cast<int>(r), best->assignment.row_to_col[r]);
  }
  return std::move(best->assignment);
}

bool ranks_before(const Assignment& a, const Assignment& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.row_to_col < b.row_to_col;
}

struct Node {
  Assignment solution;
  std::vector<std::pair<int, int>> forced;
  std::vector<std::pair<int, int>> excluded;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const { return ranks_before(b.solution, a.solution); }
};

Eigen::MatrixXd constrained(const Eigen::MatrixXd& cost, const Node& node) {
  Eigen::MatrixXd c = cost;
  for (auto [r, col] : node.excluded) c(r, col) = kForbiddenCost;
  for (auto [r, col] : node.forced) {
    const double keep = cost(r, col);
    c.row(r).setConstant(kForbiddenCost);
    c.col(col).setConstant(kForbiddenCost);
    c(r, col) = keep;
  }
  return c;
}

}  // namespace

Assignment solve_optimal(const Eigen::MatrixXd& cost) {
  auto a = try_solve(cost, cost);
  if (!a) throw AssignmentError("infeasible row");
  return *a;
}

std::vector<Assignment> murty_k_best(const Eigen::MatrixXd& cost, int k) {
  if (k < 1) throw std::invalid_argument("murty_k_best: k must be at least 1");
  std::vector<Assignment> out;
  auto first = try_solve(cost, cost);
  if (!first) throw AssignmentError("infeasible row");

  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue;
  queue.push(Node{*first, {}, {}});
  const int rows = static_cast<int>(cost.rows());

  while (!queue.empty() && static_cast<int>(out.size()) < k) {
    Node node = queue.top();
    queue.pop();
    out.push_back(node.solution);
    if (static_cast<int>(out.size()) == k) break;

    std::vector<char> is_forced(rows, 0);
    for (auto [r, c] : node.forced) is_forced[r] = 1;

    // Partition the remaining solution space of this node.
    Node child_base{{}, node.forced, node.excluded};
    for (int r = 0; r < rows; ++r) {
      if (is_forced[r]) continue;
      const int col = node.solution.row_to_col[r];
      Node child = child_base;
      child.excluded.emplace_back(r, col);
      if (auto sol = try_solve(constrained(cost, child), cost)) {
        child.solution = std::move(*sol);
        queue.push(std::move(child));
      }
      child_base.forced.emplace_back(r, col);
    }
  }
  std::stable_sort(out.begin(), out.end(), ranks_before);
  return out;
}

AssociationCosts build_cost_matrix(const Eigen::MatrixXd& log_detect,
                                   const Eigen::VectorXd& log_miss,
                                   const Eigen::VectorXd& log_new) {
  const auto m = log_detect.rows();
  const auto j = log_detect.cols();
  if (log_miss.size() != j || log_new.size() != m) {
    throw std::invalid_argument("build_cost_matrix: inconsistent shapes");
  }
  AssociationCosts out;
  out.cost = Eigen::MatrixXd::Constant(m, j + m, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index c = 0; c < j; ++c) {
      const double w = log_detect(i, c) - log_miss(c);
      if (std::isfinite(w)) out.cost(i, c) = -w;
    }
    if (std::isfinite(log_new(i))) out.cost(i, j + i) = -log_new(i);
  }
  out.constant = log_miss.sum();
  return out;
}

}  // namespace mmslam
