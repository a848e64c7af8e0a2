#pragma once

#include "mmslam/config.hpp"
#include "mmslam/gospa.hpp"
#include "mmslam/pmbm.hpp"
#include "mmslam/rbpf.hpp"
#include "mmslam/scan_io.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

namespace mmslam {

struct StepRecord {
  int step = 0;
  VehicleState truth;
  VehicleState estimate;
  /// |estimate - truth| per state component; heading difference is wrapped.
  Vec7 abs_error = Vec7::Zero();
  GospaResult gospa;
  std::map<LandmarkType, GospaResult> type_gospa;
  double ess = 0.0;
  bool resampled = false;
  int cluster_count = 0;
  int hypothesis_count = 0;
  int track_count = 0;
  std::vector<LandmarkEstimate> landmarks;
  /// Not serialized, so that outputs stay byte-identical across runs.
  double wall_time_s = 0.0;
};

struct RunOptions {
  /// Feed the true vehicle state to a single particle.
  bool known_vehicle = false;
  /// Receives every generated scan as a JSON line before filtering.
  std::ostream* scan_sink = nullptr;
  /// Scans to use instead of generating them; must cover every step.
  const std::vector<ScanRecord>* replay = nullptr;
  /// Called after each update and prune, before resampling.
  std::function<void(int step, const std::vector<Particle>& particles)> observer;
};

struct RunResult {
  ScenarioConfig config;
  bool known_vehicle = false;
  std::vector<StepRecord> steps;
  std::vector<LandmarkEstimate> final_map;
  nlohmann::json final_map_snapshot;
};

/// Keeps only the minimum-toa path of each cluster.
Scan first_paths_only(const Scan& scan);

/// True VA set (BS excluded) with types.
std::vector<TypedPoint> truth_landmarks(const ScenarioConfig& config);

RunResult run(const ScenarioConfig& config, const RunOptions& options = {});
RunResult run_known_vehicle(const ScenarioConfig& config, RunOptions options = {});

/// Column order is fixed; see csv_header().
std::string csv_header();
void write_csv(std::ostream& out, const RunResult& result);
nlohmann::json result_json(const RunResult& result);

}  // namespace mmslam
