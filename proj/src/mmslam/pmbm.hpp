#pragma once

#include "mmslam/chanmodel.hpp"
#include "mmslam/geom.hpp"
#include "mmslam/likelihood.hpp"
#include "mmslam/sigma_points.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace mmslam {

struct TypeComponent {
  double weight = 0.0;
  Vec3 mean = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
};

/// Landmark state density: a weight and a Gaussian over the landmark
/// position for each type.
struct LandmarkDensity {
  std::array<TypeComponent, kNumLandmarkTypes> components;

  TypeComponent& operator[](LandmarkType t) { return components[index_of(t)]; }
  const TypeComponent& operator[](LandmarkType t) const { return components[index_of(t)]; }

  LandmarkType map_type() const;
  double total_weight() const;
  void normalize();
};

/// What a cluster says about a landmark position, for a fixed vehicle state.
/// The geometric implementation backs the filter; tests substitute linear
/// surrogates.
class ClusterEvidence {
 public:
  virtual ~ClusterEvidence() = default;

  virtual int cluster_size() const = 0;
  virtual double log_cardinality(LandmarkType type) const = 0;
  /// The minimum-delay path.
  virtual Vec5 first_path() const = 0;
  virtual std::optional<Vec5> specular_mean(const Vec3& landmark, LandmarkType type) const = 0;
  virtual Vec5 specular_var(LandmarkType type) const = 0;

  virtual bool uses_diffuse(LandmarkType type) const = 0;
  /// Diffuse paths whose displacement is defined.
  virtual int diffuse_count() const = 0;
  /// Diffuse paths that could not be back-projected; each is charged floor().
  virtual int failed_diffuse_count() const = 0;
  virtual double floor() const = 0;
  virtual std::optional<double> displacement(int path, const Vec3& landmark) const = 0;
  virtual double diffuse_mean(LandmarkType type) const = 0;
  virtual double diffuse_var(LandmarkType type) const = 0;
};

class GeometricEvidence final : public ClusterEvidence {
 public:
  GeometricEvidence(const ClusterMeasurement& cluster, const VehicleState& state, const Vec3& bs,
                    const LikelihoodConfig& config);

  int cluster_size() const override { return size_; }
  double log_cardinality(LandmarkType type) const override;
  Vec5 first_path() const override { return first_; }
  std::optional<Vec5> specular_mean(const Vec3& landmark, LandmarkType type) const override;
  Vec5 specular_var(LandmarkType type) const override;
  bool uses_diffuse(LandmarkType type) const override { return config_->uses_diffuse(type); }
  int diffuse_count() const override { return static_cast<int>(scatter_.size()); }
  int failed_diffuse_count() const override { return failed_; }
  double floor() const override { return config_->backprojection_floor; }
  std::optional<double> displacement(int path, const Vec3& landmark) const override;
  double diffuse_mean(LandmarkType type) const override;
  double diffuse_var(LandmarkType type) const override;

  const VehicleState& state() const { return state_; }
  const ChannelParam& first_channel() const { return first_channel_; }

 private:
  int size_ = 0;
  Vec5 first_ = Vec5::Zero();
  ChannelParam first_channel_;
  VehicleState state_;
  Vec3 bs_;
  const LikelihoodConfig* config_;
  std::vector<Vec3> scatter_;  ///< back-projected diffuse paths
  int failed_ = 0;
};

struct MomentMatchResult {
  LandmarkDensity density;
  /// log of the integral of l(Z | x) f(x) over the landmark state.
  double log_marginal = -std::numeric_limits<double>::infinity();
  std::array<double, kNumLandmarkTypes> type_log_marginal{};
  bool regularized = false;
};

/// Gaussian-per-type posterior of a landmark density given one cluster:
/// the first path conditions each type Gaussian through the specular mean
/// map, then the diffuse displacements condition it jointly. Types whose
/// innovation exceeds `gate` (squared Mahalanobis) get zero weight.
MomentMatchResult moment_match_update(
    const LandmarkDensity& density, const ClusterEvidence& evidence,
    const SigmaPointOptions& options = {},
    double gate = std::numeric_limits<double>::infinity());

MomentMatchResult moment_match_update(const LandmarkDensity& density,
                                      const ClusterMeasurement& cluster,
                                      const VehicleState& state, const Vec3& bs,
                                      const LikelihoodConfig& config = {});

struct PmbmParams {
  double survival_prob = 0.99;
  double detection_prob = 0.9;
  /// Undetected mass added per type and step.
  double birth_weight = 1e-4;
  double birth_std = 5.0;
  double existence_min = 1e-5;
  double hypothesis_threshold = 1e-4;
  int max_hypotheses = 10;
  double report_threshold = 0.5;
  double gate = 400.0;
  /// log l_U charged when a cluster can neither be clutter nor a birth, so
  /// that every row of the cost matrix stays assignable.
  double unexplained_log_weight = -700.0;
  SigmaPointOptions sigma_points;
};

struct Bernoulli {
  double existence = 0.0;
  LandmarkDensity density;
};

/// A potential landmark and its local hypotheses.
struct Track {
  std::uint64_t id = 0;
  std::vector<Bernoulli> hypotheses;
};

/// One association history; `local[j]` indexes a local hypothesis of track j,
/// or is -1 when the track is absent in this hypothesis.
struct GlobalHypothesis {
  double log_weight = 0.0;
  std::vector<int> local;
};

/// Undetected landmarks: a scalar mass per surface type. The spatial shape is
/// built from each cluster at update time.
struct UndetectedIntensity {
  std::array<double, kNumLandmarkTypes> mass{};
  double total() const;
};

struct PmbmMap {
  UndetectedIntensity undetected;
  std::vector<Track> tracks;
  std::vector<GlobalHypothesis> hypotheses{GlobalHypothesis{}};
  std::uint64_t next_id = 0;

  /// Map holding only the known BS as a sure Bernoulli.
  static PmbmMap with_base_station(const Vec3& bs);
};

struct UpdateContext {
  Vec3 bs = Vec3::Zero();
  PmbmParams params;
  LikelihoodConfig likelihood;
  ScanConfig scan;
};

struct MapUpdateResult {
  /// Unnormalized log-weights of the updated global hypotheses.
  std::vector<double> hypothesis_log_weights;
  bool regularized = false;
};

void predict_map(PmbmMap& map, double survival_prob, double birth_weight);

/// Measurement-driven birth density for one cluster: per surface type, the
/// first path is back-projected to an incidence point and the BS mirrored
/// through it. Component weights are the (unnormalized) undetected masses.
std::optional<LandmarkDensity> birth_density(const ClusterMeasurement& cluster,
                                             const VehicleState& state,
                                             const UndetectedIntensity& undetected,
                                             const UpdateContext& context);

MapUpdateResult update_map(PmbmMap& map, const Scan& scan, const VehicleState& state,
                           const UpdateContext& context);

struct PruneThresholds {
  double hypothesis_threshold = 1e-4;
  int max_hypotheses = 10;
  double existence_min = 1e-5;
};

void prune(PmbmMap& map, const PruneThresholds& thresholds);
void normalize_hypotheses(PmbmMap& map);

struct LandmarkEstimate {
  std::uint64_t id = 0;
  Vec3 position = Vec3::Zero();
  LandmarkType type = LandmarkType::kBS;
  double existence = 0.0;
};

std::vector<LandmarkEstimate> estimate_map(const PmbmMap& map, double report_threshold = 0.5);

double log_sum_exp(const std::vector<double>& values);

}  // namespace mmslam
