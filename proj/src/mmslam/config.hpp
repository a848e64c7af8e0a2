#pragma once

#include "mmslam/chanmodel.hpp"
#include "mmslam/gospa.hpp"
#include "mmslam/pmbm.hpp"
#include "mmslam/rbpf.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmslam {

enum class LikelihoodMode { kAllPaths, kSpecularOnly };

std::string_view to_string(LikelihoodMode mode);
std::optional<LikelihoodMode> parse_likelihood_mode(std::string_view name);

/// Invalid configuration; `what()` starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ScenarioConfig {
  Vec3 bs_position = Vec3(0.0, 0.0, 10.0);
  std::vector<SurfaceSpec> surfaces;
  VehicleState initial_truth;
  Vec7 initial_prior_bias = Vec7::Zero();
  Vec7 initial_prior_std = Vec7::Zero();
  int steps = 40;
  double dt = 0.5;
  int particle_count = 100;
  ProcessNoise process_noise;

  double detection_prob = 0.9;
  double survival_prob = 0.99;
  double clutter_rate = 1.0;
  ClutterRegion clutter_region;
  double birth_weight = 1e-4;
  double birth_std = 5.0;

  double existence_min = 1e-5;
  double hypothesis_threshold = 1e-4;
  int max_hypotheses = 10;
  double report_threshold = 0.5;
  double ess_threshold = 0.5;

  double lateral_spread = 2.0;
  double backprojection_floor = -40.0;
  GospaParams gospa;
  LikelihoodMode mode = LikelihoodMode::kAllPaths;
  std::uint64_t seed = 1;

  /// Waveform-level parameters, echoed into outputs but otherwise unused.
  nlohmann::json signal_metadata = nlohmann::json::object();

  Environment environment() const;
  ScanConfig scan_config() const;
  StatisticsTable statistics() const;
  LikelihoodConfig likelihood_config() const;
  UpdateContext update_context() const;
  PruneThresholds prune_thresholds() const;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

ScenarioConfig default_scenario();

nlohmann::json to_json(const ScenarioConfig& config);
/// Missing fields keep their defaults; unknown fields are rejected.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario_file(const std::string& path);

nlohmann::json map_snapshot(const PmbmMap& map);

}  // namespace mmslam
