#include "mmslam/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mmslam {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

}  // namespace

double cardinality_pmf(int n, const CardinalityModel& model) {
  if (model.kind == CardinalityModel::Kind::kDirac) return n == 1 ? 1.0 : 0.0;
  if (n < model.shift) return 0.0;
  return std::pow(1.0 - model.p, n - model.shift) * model.p;
}

double cardinality_pmf(int n, LandmarkType type) {
  return cardinality_pmf(n, default_statistics(type).cardinality);
}

double log_cardinality_pmf(int n, LandmarkType type, const LikelihoodConfig& config) {
  const double p = config.specular_only ? (n == 1 ? 1.0 : 0.0)
                                        : cardinality_pmf(n, config.at(type).cardinality);
  return p > 0.0 ? std::log(p) : kNegInf;
}

std::optional<Vec5> specular_mean(const LandmarkState& landmark, const VehicleState& state,
                                  const Vec3& bs, const TypeStatistics& stats) {
  std::optional<ChannelParam> h;
  if (landmark.type == LandmarkType::kBS) {
    h = try_measurement_model(landmark.position, state, bs, PathKind::kLineOfSight);
  } else {
    const auto x0 = try_incidence_point(landmark.position, state.position, bs);
    if (!x0) return std::nullopt;
    h = try_measurement_model(*x0, state, bs, PathKind::kReflected);
  }
  if (!h) return std::nullopt;
  return Vec5(h->as_vector() + stats.specular_bias);
}

double log_specular_gaussian(const Vec5& z, const Vec5& mean, const Vec5& var) {
  Vec5 r = z - mean;
  r(1) = wrap_angle(r(1));
  r(3) = wrap_angle(r(3));
  double acc = 0.0;
  for (int d = 0; d < 5; ++d) acc += -0.5 * (kLogTwoPi + std::log(var(d))) - 0.5 * r(d) * r(d) / var(d);
  return acc;
}

double log_specular_density(const ChannelParam& z0, const LandmarkState& landmark,
                            const VehicleState& state, const Vec3& bs,
                            const LikelihoodConfig& config) {
  const auto& stats = config.at(landmark.type);
  const auto mean = specular_mean(landmark, state, bs, stats);
  if (!mean) return kNegInf;
  return log_specular_gaussian(z0.as_vector(), *mean, stats.specular_var);
}

double specular_density(const ChannelParam& z0, const LandmarkState& landmark,
                        const VehicleState& state, const Vec3& bs,
                        const LikelihoodConfig& config) {
  return std::exp(log_specular_density(z0, landmark, state, bs, config));
}

double log_diffuse_density(double d_hat, const TypeStatistics& stats) {
  const double r = (d_hat - stats.diffuse_mean) / stats.diffuse_std;
  return -0.5 * kLogTwoPi - std::log(stats.diffuse_std) - 0.5 * r * r;
}

double diffuse_density(double d_hat, LandmarkType type, const LikelihoodConfig& config) {
  const auto& stats = config.at(type);
  if (!stats.has_diffuse) throw std::invalid_argument("no diffuse component");
  return std::exp(log_diffuse_density(d_hat, stats));
}

std::size_t first_path_index(const ClusterMeasurement& cluster) {
  std::size_t best = 0;
  for (std::size_t l = 1; l < cluster.size(); ++l) {
    if (cluster[l].toa < cluster[best].toa) best = l;
  }
  return best;
}

double cluster_log_likelihood(const ClusterMeasurement& cluster, const LandmarkState& landmark,
                              const VehicleState& state, const Vec3& bs,
                              const LikelihoodConfig& config) {
  if (cluster.empty()) return kNegInf;
  double ll = log_cardinality_pmf(static_cast<int>(cluster.size()), landmark.type, config);
  if (ll == kNegInf) return ll;

  const std::size_t first = first_path_index(cluster);
  ll += log_specular_density(cluster[first], landmark, state, bs, config);
  if (ll == kNegInf || !config.uses_diffuse(landmark.type)) return ll;

  const auto& stats = config.at(landmark.type);
  for (std::size_t l = 0; l < cluster.size(); ++l) {
    if (l == first) continue;
    const auto p = try_backproject(cluster[l], state, bs);
    if (!p) {
      ll += config.backprojection_floor;
      continue;
    }
    const auto frame = try_surface_frame(landmark.position, bs);
    if (!frame) return kNegInf;
    ll += log_diffuse_density(frame->normal.dot(*p - frame->point), stats);
  }
  return ll;
}

double clutter_density(const ChannelParam& z, const ScanConfig& config) {
  const auto& region = config.clutter_region;
  return region.contains(z) ? 1.0 / region.volume() : 0.0;
}

double clutter_weight(const ClusterMeasurement& cluster, const ScanConfig& config) {
  if (cluster.size() != 1) return 0.0;
  return config.clutter_rate * clutter_density(cluster.front(), config);
}

}  // namespace mmslam
