#pragma once

#include "mmslam/geom.hpp"

#include <map>
#include <span>
#include <vector>

namespace mmslam {

struct GospaParams {
  double p = 2.0;
  double c = 20.0;
  double alpha = 2.0;
};

/// GOSPA distance and its three additive terms (before the 1/p root):
/// total = (localization + missed + false_targets)^(1/p).
struct GospaResult {
  double total = 0.0;
  double localization = 0.0;
  double missed = 0.0;
  double false_targets = 0.0;
  int missed_count = 0;
  int false_count = 0;
};

GospaResult gospa(std::span<const Vec3> truth, std::span<const Vec3> estimates,
                  const GospaParams& params = {});

struct TypedPoint {
  Vec3 position;
  LandmarkType type;
};

/// GOSPA per surface type (SM, MR, VR). Estimates with the wrong type count
/// against their claimed type; BS entries are ignored.
std::map<LandmarkType, GospaResult> per_type_gospa(std::span<const TypedPoint> truth,
                                                   std::span<const TypedPoint> estimates,
                                                   const GospaParams& params = {});

}  // namespace mmslam
