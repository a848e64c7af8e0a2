#include "mmslam/runner.hpp"

#include "mmslam/likelihood.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace mmslam {

namespace {

constexpr std::uint32_t kScanStream = 0x5ca17u;
constexpr std::uint32_t kFilterStream = 0xf17e5u;

Rng make_rng(std::uint64_t seed, std::uint32_t stream, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream, index};
  return Rng(seq);
}

Vec7 state_error(const VehicleState& est, const VehicleState& truth) {
  Vec7 e = (est.as_vector() - truth.as_vector()).cwiseAbs();
  e[3] = std::abs(wrap_angle(est.heading - truth.heading));
  return e;
}

std::vector<Particle> initial_particles(const ScenarioConfig& config, bool known_vehicle,
                                        Rng& rng) {
  const PmbmMap map = PmbmMap::with_base_station(config.bs_position);
  if (known_vehicle) return {Particle{config.initial_truth, 0.0, map}};

  const Vec7 mean = config.initial_truth.as_vector() + config.initial_prior_bias;
  const int n = config.particle_count;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Particle> particles;
  particles.reserve(n);
  const double log_w = -std::log(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    Vec7 x = mean;
    for (int c = 0; c < 7; ++c) x[c] += config.initial_prior_std[c] * normal(rng);
    VehicleState s = VehicleState::from_vector(x);
    s.heading = wrap_angle(s.heading);
    particles.push_back(Particle{s, log_w, map});
  }
  return particles;
}

std::vector<TypedPoint> typed(const std::vector<LandmarkEstimate>& estimates) {
  std::vector<TypedPoint> out;
  for (const auto& e : estimates) {
    if (e.type != LandmarkType::kBS) out.push_back({e.position, e.type});
  }
  return out;
}

std::vector<Vec3> positions(const std::vector<TypedPoint>& points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.position);
  return out;
}

}  // namespace

Scan first_paths_only(const Scan& scan) {
  Scan out;
  out.reserve(scan.size());
  for (const auto& cluster : scan) {
    if (cluster.empty()) continue;
    out.push_back({cluster[first_path_index(cluster)]});
  }
  return out;
}

std::vector<TypedPoint> truth_landmarks(const ScenarioConfig& config) {
  std::vector<TypedPoint> out;
  for (const auto& l : config.environment().landmarks()) {
    if (l.type != LandmarkType::kBS) out.push_back({l.position, l.type});
  }
  return out;
}

RunResult run(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  if (options.replay && static_cast<int>(options.replay->size()) < config.steps) {
    throw ScanIoError("replay holds " + std::to_string(options.replay->size()) +
                      " scans but the run needs " + std::to_string(config.steps));
  }
  const bool known = options.known_vehicle;
  const Environment env = config.environment();
  const ScanConfig scan_config = config.scan_config();
  const StatisticsTable stats = config.statistics();
  const UpdateContext context = config.update_context();
  const PruneThresholds thresholds = config.prune_thresholds();
  const std::vector<TypedPoint> truth_points = truth_landmarks(config);
  const std::vector<Vec3> truth_positions = positions(truth_points);

  Rng filter_rng = make_rng(config.seed, kFilterStream, 0);
  std::vector<Particle> particles = initial_particles(config, known, filter_rng);
  VehicleState truth = config.initial_truth;

  RunResult result;
  result.config = config;
  result.known_vehicle = known;
  result.steps.reserve(config.steps);

  for (int k = 1; k <= config.steps; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    truth = propagate(truth, config.dt);

    Scan scan;
    if (options.replay) {
      scan = (*options.replay)[k - 1].scan;
    } else {
      Rng scan_rng = make_rng(config.seed, kScanStream, static_cast<std::uint32_t>(k));
      scan = generate_scan(env, truth, scan_config, stats, scan_rng).clusters;
    }
    if (options.scan_sink) write_scan_line(*options.scan_sink, k, scan);
    const Scan filtered =
        config.mode == LikelihoodMode::kSpecularOnly ? first_paths_only(scan) : scan;

    std::vector<std::vector<double>> hyp_weights;
    hyp_weights.reserve(particles.size());
    for (auto& p : particles) {
      p.state = known ? truth : predict_particle(p.state, config.dt, config.process_noise, filter_rng);
      predict_map(p.map, config.survival_prob, config.birth_weight);
      hyp_weights.push_back(update_map(p.map, filtered, p.state, context).hypothesis_log_weights);
      prune(p.map, thresholds);
    }
    update_weights(particles, hyp_weights);
    if (options.observer) options.observer(k, particles);

    StepRecord rec;
    rec.step = k;
    rec.truth = truth;
    rec.estimate = estimate_state(particles);
    rec.abs_error = state_error(rec.estimate, truth);
    rec.ess = effective_sample_size(particles);
    rec.cluster_count = static_cast<int>(filtered.size());

    std::size_t best = 0;
    for (std::size_t i = 1; i < particles.size(); ++i) {
      if (particles[i].log_weight > particles[best].log_weight) best = i;
    }
    const PmbmMap& map = particles[best].map;
    rec.hypothesis_count = static_cast<int>(map.hypotheses.size());
    rec.track_count = static_cast<int>(map.tracks.size());
    rec.landmarks = estimate_map(map, config.report_threshold);
    const std::vector<TypedPoint> est_points = typed(rec.landmarks);
    const std::vector<Vec3> est_positions = positions(est_points);
    rec.gospa = gospa(truth_positions, est_positions, config.gospa);
    rec.type_gospa = per_type_gospa(truth_points, est_points, config.gospa);

    if (k == config.steps) {
      result.final_map = rec.landmarks;
      result.final_map_snapshot = map_snapshot(map);
    }
    rec.resampled = !known && resample(particles, config.ess_threshold, filter_rng);
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.steps.push_back(std::move(rec));
  }
  return result;
}

RunResult run_known_vehicle(const ScenarioConfig& config, RunOptions options) {
  options.known_vehicle = true;
  return run(config, options);
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kStateNames[] = {"x", "y", "z", "heading", "speed", "turn_rate", "clock_bias"};

}  // namespace

std::string csv_header() {
  std::string h = "step";
  for (const char* prefix : {"truth_", "est_", "err_"}) {
    for (const char* name : kStateNames) h += std::string(",") + prefix + name;
  }
  h += ",gospa,gospa_loc,gospa_missed,gospa_false";
  for (LandmarkType t : kSurfaceTypes) {
    const std::string p(to_string(t));
    h += "," + p + "_gospa," + p + "_loc," + p + "_missed," + p + "_false";
  }
  h += ",ess,resampled,clusters,hypotheses,tracks,landmarks";
  return h;
}

void write_csv(std::ostream& out, const RunResult& result) {
  out << csv_header() << '\n';
  const auto put_gospa = [&](const GospaResult& g) {
    out << ',' << num(g.total) << ',' << num(g.localization) << ',' << num(g.missed) << ','
        << num(g.false_targets);
  };
  for (const auto& r : result.steps) {
    out << r.step;
    for (const Vec7& v : {r.truth.as_vector(), r.estimate.as_vector(), r.abs_error}) {
      for (int i = 0; i < 7; ++i) out << ',' << num(v[i]);
    }
    put_gospa(r.gospa);
    for (LandmarkType t : kSurfaceTypes) {
      const auto it = r.type_gospa.find(t);
      put_gospa(it == r.type_gospa.end() ? GospaResult{} : it->second);
    }
    out << ',' << num(r.ess) << ',' << (r.resampled ? 1 : 0) << ',' << r.cluster_count << ','
        << r.hypothesis_count << ',' << r.track_count << ',' << r.landmarks.size() << '\n';
  }
}

nlohmann::json result_json(const RunResult& result) {
  using nlohmann::json;
  json landmarks = json::array();
  for (const auto& l : result.final_map) {
    landmarks.push_back({{"id", l.id},
                         {"type", std::string(to_string(l.type))},
                         {"position", {l.position.x(), l.position.y(), l.position.z()}},
                         {"existence", l.existence}});
  }
  json final_state = json::array();
  if (!result.steps.empty()) {
    const Vec7 v = result.steps.back().estimate.as_vector();
    for (int i = 0; i < 7; ++i) final_state.push_back(v[i]);
  }
  return json{{"seed", result.config.seed},
              {"mode", std::string(to_string(result.config.mode))},
              {"known_vehicle", result.known_vehicle},
              {"steps", result.steps.size()},
              {"final_state_estimate", final_state},
              {"final_map", landmarks},
              {"map_snapshot", result.final_map_snapshot},
              {"config", to_json(result.config)}};
}

}  // namespace mmslam
