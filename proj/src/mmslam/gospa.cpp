#include "mmslam/gospa.hpp"

#include "mmslam/assignment.hpp"

#include <cmath>

namespace mmslam {

GospaResult gospa(std::span<const Vec3> truth, std::span<const Vec3> estimates,
                  const GospaParams& params) {
  const double cp = std::pow(params.c, params.p);
  const double unmatched = cp / params.alpha;
  const auto nx = static_cast<Eigen::Index>(truth.size());
  const auto ny = static_cast<Eigen::Index>(estimates.size());

  GospaResult out;
  if (nx == 0 || ny == 0) {
    out.missed_count = static_cast<int>(nx);
    out.false_count = static_cast<int>(ny);
  } else {
    // Rows are truth points; columns are estimates followed by one "missed"
    // slot per truth point. Pairing removes one false-target penalty.
    Eigen::MatrixXd cost(nx, ny + nx);
    Eigen::MatrixXd dist_p(nx, ny);
    for (Eigen::Index i = 0; i < nx; ++i) {
      for (Eigen::Index j = 0; j < ny; ++j) {
        const double d = std::min((truth[i] - estimates[j]).norm(), params.c);
        dist_p(i, j) = std::pow(d, params.p);
        cost(i, j) = dist_p(i, j) - unmatched;
      }
      for (Eigen::Index j = 0; j < nx; ++j) cost(i, ny + j) = unmatched;
    }
    const Assignment a = solve_optimal(cost);
    int paired = 0;
    for (Eigen::Index i = 0; i < nx; ++i) {
      const int j = a.row_to_col[i];
      if (j < ny && (truth[i] - estimates[j]).norm() < params.c) {
        out.localization += dist_p(i, j);
        ++paired;
      }
    }
    out.missed_count = static_cast<int>(nx) - paired;
    out.false_count = static_cast<int>(ny) - paired;
  }
  out.missed = unmatched * out.missed_count;
  out.false_targets = unmatched * out.false_count;
  out.total = std::pow(out.localization + out.missed + out.false_targets, 1.0 / params.p);
  return out;
}

std::map<LandmarkType, GospaResult> per_type_gospa(std::span<const TypedPoint> truth,
                                                   std::span<const TypedPoint> estimates,
                                                   const GospaParams& params) {
  std::map<LandmarkType, GospaResult> out;
  for (LandmarkType t : kSurfaceTypes) {
    std::vector<Vec3> x, y;
    for (const auto& p : truth) {
      if (p.type == t) x.push_back(p.position);
    }
    for (const auto& p : estimates) {
      if (p.type == t) y.push_back(p.position);
    }
    out[t] = gospa(x, y, params);
  }
  return out;
}

}  // namespace mmslam
