#pragma once

#include "mmslam/chanmodel.hpp"
#include "mmslam/geom.hpp"

#include <optional>
#include <stdexcept>

namespace mmslam {

struct LikelihoodConfig {
  StatisticsTable stats = default_statistics_table();
  /// Log-density charged for a diffuse path that cannot be back-projected.
  double backprojection_floor = -40.0;
  /// Baseline that sees only the first path of every cluster: every type then
  /// has a one-path cardinality and no diffuse factor.
  bool specular_only = false;

  const TypeStatistics& at(LandmarkType t) const { return stats[index_of(t)]; }
  bool uses_diffuse(LandmarkType t) const { return !specular_only && at(t).has_diffuse; }
};

double cardinality_pmf(int n, const CardinalityModel& model);
double cardinality_pmf(int n, LandmarkType type);
double log_cardinality_pmf(int n, LandmarkType type, const LikelihoodConfig& config);

/// Mean of the first-path measurement (geometry plus type bias), or nullopt
/// when the incidence point is undefined.
std::optional<Vec5> specular_mean(const LandmarkState& landmark, const VehicleState& state,
                                  const Vec3& bs, const TypeStatistics& stats);

/// Log of a diagonal Gaussian density; azimuth residuals are wrapped.
double log_specular_gaussian(const Vec5& z, const Vec5& mean, const Vec5& var);

double log_specular_density(const ChannelParam& z0, const LandmarkState& landmark,
                            const VehicleState& state, const Vec3& bs,
                            const LikelihoodConfig& config = {});
double specular_density(const ChannelParam& z0, const LandmarkState& landmark,
                        const VehicleState& state, const Vec3& bs,
                        const LikelihoodConfig& config = {});

/// Throws std::invalid_argument("no diffuse component") for BS and SM.
double diffuse_density(double d_hat, LandmarkType type, const LikelihoodConfig& config = {});
double log_diffuse_density(double d_hat, const TypeStatistics& stats);

/// Index of the minimum-delay path, the one treated as specular.
std::size_t first_path_index(const ClusterMeasurement& cluster);

/// log l(Z | x_LM, s, m). Returns -inf for impossible combinations.
double cluster_log_likelihood(const ClusterMeasurement& cluster, const LandmarkState& landmark,
                              const VehicleState& state, const Vec3& bs,
                              const LikelihoodConfig& config = {});

double clutter_density(const ChannelParam& z, const ScanConfig& config);
/// Cluster-level clutter intensity: rate x density for singletons, else 0.
double clutter_weight(const ClusterMeasurement& cluster, const ScanConfig& config);

}  // namespace mmslam
