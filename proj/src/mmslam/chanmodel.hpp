#pragma once

#include "mmslam/geom.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace mmslam {

using Rng = std::mt19937_64;

/// One cluster Z^i: every channel-parameter estimate attributed to one source.
using ClusterMeasurement = std::vector<ChannelParam>;
using Scan = std::vector<ClusterMeasurement>;

/// Number-of-paths distribution: either exactly one path, or
/// shift + G with P(G = n) = (1 - p)^n p.
struct CardinalityModel {
  enum class Kind { kDirac, kShiftedGeometric };
  Kind kind = Kind::kDirac;
  int shift = 1;
  double p = 1.0;

  static CardinalityModel dirac() { return {Kind::kDirac, 1, 1.0}; }
  static CardinalityModel shifted_geometric(int shift, double p) {
    return {Kind::kShiftedGeometric, shift, p};
  }
};

/// Per-type cluster statistics (one row of the likelihood table).
struct TypeStatistics {
  CardinalityModel cardinality;
  Vec5 specular_bias = Vec5::Zero();
  /// Diagonal of the specular covariance (variances).
  Vec5 specular_var = Vec5::Ones();
  bool has_diffuse = false;
  double diffuse_mean = 0.0;
  double diffuse_std = 1.0;
  /// In-plane standard deviation of diffuse scatter points. Simulator only.
  double lateral_spread = 2.0;
};

TypeStatistics default_statistics(LandmarkType type);

using StatisticsTable = std::array<TypeStatistics, kNumLandmarkTypes>;
StatisticsTable default_statistics_table();

/// Uniform clutter support. Azimuths always span (-pi, pi].
struct ClutterRegion {
  double toa_min = 301.0;
  double toa_max = 550.0;
  double el_min = -0.7853981633974483;
  double el_max = 0.7853981633974483;

  double volume() const;
  bool contains(const ChannelParam& z) const;
};

struct ScanConfig {
  double detection_prob = 0.9;
  double clutter_rate = 1.0;
  ClutterRegion clutter_region;
};

int sample_cardinality(const TypeStatistics& stats, Rng& rng);

/// A simulated cluster together with the generating labels, which are hidden
/// from the filter.
struct SampledCluster {
  ClusterMeasurement paths;  ///< sorted by increasing toa
  int specular_index = -1;   ///< position of the specular path after sorting
  /// Sampled surface displacement of each path (NaN for the specular one).
  std::vector<double> displacements;
  bool degenerate = false;
};

SampledCluster sample_cluster(const LandmarkState& landmark, const VehicleState& truth,
                              const TypeStatistics& stats, const Vec3& bs, Rng& rng);

struct Environment {
  Vec3 bs = Vec3::Zero();
  std::vector<SurfaceSpec> surfaces;

  /// BS first, then one VA per surface in order.
  std::vector<LandmarkState> landmarks() const;
};

struct GeneratedScan {
  Scan clusters;
  int clutter_count = 0;
  int degenerate_count = 0;
};

GeneratedScan generate_scan(const Environment& env, const VehicleState& truth,
                            const ScanConfig& config, const StatisticsTable& stats, Rng& rng);

}  // namespace mmslam
