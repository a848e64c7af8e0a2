#include "mmslam/chanmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace mmslam {

namespace {

Vec5 squared(double toa_std, double angle_std) {
  Vec5 v;
  v << toa_std * toa_std, angle_std * angle_std, angle_std * angle_std, angle_std * angle_std,
      angle_std * angle_std;
  return v;
}

Vec5 toa_bias(double b) {
  Vec5 v = Vec5::Zero();
  v(0) = b;
  return v;
}

ChannelParam add_noise(const ChannelParam& mean, const TypeStatistics& stats, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec5 z = mean.as_vector() + stats.specular_bias;
  for (int d = 0; d < 5; ++d) z(d) += std::sqrt(stats.specular_var(d)) * normal(rng);
  z(1) = wrap_angle(z(1));
  z(3) = wrap_angle(z(3));
  return ChannelParam::from_vector(z);
}

// Two unit vectors spanning the plane orthogonal to n.
std::pair<Vec3, Vec3> plane_basis(const Vec3& n) {
  const Vec3 helper = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  Vec3 t1 = n.cross(helper).normalized();
  Vec3 t2 = n.cross(t1);
  return {t1, t2};
}

}  // namespace

TypeStatistics default_statistics(LandmarkType type) {
  TypeStatistics s;
  switch (type) {
    case LandmarkType::kBS:
      s.cardinality = CardinalityModel::dirac();
      s.specular_var = squared(0.003, 0.0001);
      break;
    case LandmarkType::kSM:
      s.cardinality = CardinalityModel::dirac();
      s.specular_var = squared(0.01, 0.002);
      break;
    case LandmarkType::kMR:
      s.cardinality = CardinalityModel::shifted_geometric(2, 0.55);
      s.specular_bias = toa_bias(0.07);
      s.specular_var = squared(0.1, 0.008);
      s.has_diffuse = true;
      s.diffuse_mean = 0.435;
      s.diffuse_std = 0.3;
      break;
    case LandmarkType::kVR:
      s.cardinality = CardinalityModel::shifted_geometric(4, 0.27);
      s.specular_bias = toa_bias(0.8);
      s.specular_var = squared(0.5, 0.05);
      s.has_diffuse = true;
      s.diffuse_mean = 0.435;
      s.diffuse_std = 0.3;
      break;
  }
  return s;
}

StatisticsTable default_statistics_table() {
  StatisticsTable table;
  for (LandmarkType t : kAllTypes) table[index_of(t)] = default_statistics(t);
  return table;
}

double ClutterRegion::volume() const {
  const double two_pi = 2.0 * std::numbers::pi;
  const double el = el_max - el_min;
  return (toa_max - toa_min) * two_pi * el * two_pi * el;
}

bool ClutterRegion::contains(const ChannelParam& z) const {
  auto in_el = [&](double e) { return e >= el_min && e <= el_max; };
  return z.toa >= toa_min && z.toa <= toa_max && in_el(z.aoa_el) && in_el(z.aod_el) &&
         std::isfinite(z.aoa_az) && std::isfinite(z.aod_az);
}

int sample_cardinality(const TypeStatistics& stats, Rng& rng) {
  const auto& c = stats.cardinality;
  if (c.kind == CardinalityModel::Kind::kDirac) return 1;
  if (c.p >= 1.0) return c.shift;
  std::geometric_distribution<int> geo(c.p);
  return c.shift + geo(rng);
}

SampledCluster sample_cluster(const LandmarkState& landmark, const VehicleState& truth,
                              const TypeStatistics& stats, const Vec3& bs, Rng& rng) {
  SampledCluster out;
  const int n = sample_cardinality(stats, rng);

  if (landmark.type == LandmarkType::kBS) {
    const auto mean = try_measurement_model(bs, truth, bs, PathKind::kLineOfSight);
    if (!mean) {
      out.degenerate = true;
      return out;
    }
    out.paths.push_back(add_noise(*mean, stats, rng));
    out.specular_index = 0;
    out.displacements.push_back(std::numeric_limits<double>::quiet_NaN());
    return out;
  }

  const auto frame = try_surface_frame(landmark.position, bs);
  const auto x0 = try_incidence_point(landmark.position, truth.position, bs);
  const auto specular_mean =
      x0 ? try_measurement_model(*x0, truth, bs, PathKind::kReflected) : std::nullopt;
  if (!frame || !specular_mean) {
    out.degenerate = true;
    return out;
  }

  std::vector<std::pair<ChannelParam, double>> labelled;
  labelled.reserve(n);
  labelled.emplace_back(add_noise(*specular_mean, stats, rng),
                        std::numeric_limits<double>::quiet_NaN());

  const auto [t1, t2] = plane_basis(frame->normal);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int l = 1; l < n; ++l) {
    const double a = stats.lateral_spread * normal(rng);
    const double b = stats.lateral_spread * normal(rng);
    const double d = stats.diffuse_mean + stats.diffuse_std * normal(rng);
    const Vec3 scatter = *x0 + a * t1 + b * t2 + d * frame->normal;
    auto z = try_measurement_model(scatter, truth, bs, PathKind::kReflected);
    if (!z) continue;
    labelled.emplace_back(*z, d);
  }

  std::vector<std::size_t> order(labelled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return labelled[i].first.toa < labelled[j].first.toa;
  });
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.paths.push_back(labelled[order[k]].first);
    out.displacements.push_back(labelled[order[k]].second);
    if (order[k] == 0) out.specular_index = static_cast<int>(k);
  }
  return out;
}

std::vector<LandmarkState> Environment::landmarks() const {
  std::vector<LandmarkState> out;
  out.push_back({bs, LandmarkType::kBS});
  for (const auto& s : surfaces) out.push_back({reflect_bs(bs, s), s.type});
  return out;
}

GeneratedScan generate_scan(const Environment& env, const VehicleState& truth,
                            const ScanConfig& config, const StatisticsTable& stats, Rng& rng) {
  GeneratedScan scan;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (const auto& lm : env.landmarks()) {
    if (!(unit(rng) < config.detection_prob)) continue;
    auto cluster = sample_cluster(lm, truth, stats[index_of(lm.type)], env.bs, rng);
    if (cluster.degenerate || cluster.paths.empty()) {
      ++scan.degenerate_count;
      continue;
    }
    scan.clusters.push_back(std::move(cluster.paths));
  }

  if (config.clutter_rate > 0.0) {
    std::poisson_distribution<int> poisson(config.clutter_rate);
    const int count = poisson(rng);
    const auto& r = config.clutter_region;
    std::uniform_real_distribution<double> toa(r.toa_min, r.toa_max);
    std::uniform_real_distribution<double> az(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> el(r.el_min, r.el_max);
    for (int c = 0; c < count; ++c) {
      ChannelParam z;
      z.toa = toa(rng);
      z.aoa_az = wrap_angle(az(rng));
      z.aoa_el = el(rng);
      z.aod_az = wrap_angle(az(rng));
      z.aod_el = el(rng);
      scan.clusters.push_back({z});
    }
    scan.clutter_count = count;
  }

  std::shuffle(scan.clusters.begin(), scan.clusters.end(), rng);
  return scan;
}

}  // namespace mmslam
