#include "mmslam/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace mmslam {

using nlohmann::json;

std::string_view to_string(LikelihoodMode mode) {
  return mode == LikelihoodMode::kAllPaths ? "all_paths" : "specular_only";
}

std::optional<LikelihoodMode> parse_likelihood_mode(std::string_view name) {
  if (name == "all_paths") return LikelihoodMode::kAllPaths;
  if (name == "specular_only") return LikelihoodMode::kSpecularOnly;
  return std::nullopt;
}

Environment ScenarioConfig::environment() const { return Environment{bs_position, surfaces}; }

ScanConfig ScenarioConfig::scan_config() const {
  return ScanConfig{detection_prob, clutter_rate, clutter_region};
}

StatisticsTable ScenarioConfig::statistics() const {
  StatisticsTable table = default_statistics_table();
  for (auto& s : table) s.lateral_spread = lateral_spread;
  return table;
}

LikelihoodConfig ScenarioConfig::likelihood_config() const {
  LikelihoodConfig c;
  c.stats = statistics();
  c.backprojection_floor = backprojection_floor;
  c.specular_only = mode == LikelihoodMode::kSpecularOnly;
  return c;
}

UpdateContext ScenarioConfig::update_context() const {
  UpdateContext ctx;
  ctx.bs = bs_position;
  ctx.params.survival_prob = survival_prob;
  ctx.params.detection_prob = detection_prob;
  ctx.params.birth_weight = birth_weight;
  ctx.params.birth_std = birth_std;
  ctx.params.existence_min = existence_min;
  ctx.params.hypothesis_threshold = hypothesis_threshold;
  ctx.params.max_hypotheses = max_hypotheses;
  ctx.params.report_threshold = report_threshold;
  ctx.likelihood = likelihood_config();
  ctx.scan = scan_config();
  return ctx;
}

PruneThresholds ScenarioConfig::prune_thresholds() const {
  return PruneThresholds{hypothesis_threshold, max_hypotheses, existence_min};
}

namespace {

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void require_probability(double p, const std::string& field) {
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, field, "must lie in [0, 1]");
}

void require_positive(double v, const std::string& field) {
  require(std::isfinite(v) && v > 0.0, field, "must be positive");
}

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& v, const std::string& field) {
  require(v.allFinite(), field, "must be finite");
}

}  // namespace

void ScenarioConfig::validate() const {
  require_finite(bs_position, "bs_position");
  require(!surfaces.empty(), "surfaces", "at least one surface required");
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const std::string path = "surfaces[" + std::to_string(i) + "]";
    const auto& s = surfaces[i];
    require_finite(s.point_on_plane, path + ".point");
    require(s.unit_normal.allFinite() && std::abs(s.unit_normal.norm() - 1.0) < 1e-9,
            path + ".normal", "must be a unit vector");
    require(s.type != LandmarkType::kBS, path + ".type", "must be SM, MR or VR");
    require(std::abs((bs_position - s.point_on_plane).dot(s.unit_normal)) > 1e-6, path,
            "plane passes through the BS");
  }
  require_finite(initial_truth.as_vector(), "initial_truth");
  require_finite(initial_prior_bias, "initial_prior_bias");
  require(initial_prior_std.allFinite() && (initial_prior_std.array() >= 0.0).all(),
          "initial_prior_std", "must be finite and non-negative");
  require(steps >= 1, "steps", "must be at least 1");
  require_positive(dt, "dt");
  require(particle_count >= 1, "particle_count", "must be at least 1");
  for (std::size_t i = 0; i < process_noise.std.size(); ++i) {
    require(std::isfinite(process_noise.std[i]) && process_noise.std[i] >= 0.0,
            "Q[" + std::to_string(i) + "]", "must be finite and non-negative");
  }
  require_probability(detection_prob, "p_D");
  require_probability(survival_prob, "p_S");
  require(std::isfinite(clutter_rate) && clutter_rate >= 0.0, "clutter_rate",
          "must be non-negative");
  require(clutter_region.toa_max > clutter_region.toa_min, "clutter_region.toa_max",
          "must exceed toa_min");
  require(clutter_region.el_max > clutter_region.el_min, "clutter_region.el_max",
          "must exceed el_min");
  require(clutter_region.el_min >= -std::numbers::pi / 2 &&
              clutter_region.el_max <= std::numbers::pi / 2,
          "clutter_region", "elevations must lie in [-pi/2, pi/2]");
  require_positive(birth_weight, "birth_weight");
  require_positive(birth_std, "birth_std");
  require_probability(existence_min, "r_min");
  require_probability(hypothesis_threshold, "hypothesis_threshold");
  require(max_hypotheses >= 1, "max_hypotheses", "must be at least 1");
  require_probability(report_threshold, "report_threshold");
  require_probability(ess_threshold, "ess_threshold");
  require(std::isfinite(lateral_spread) && lateral_spread >= 0.0, "lateral_spread",
          "must be non-negative");
  require(std::isfinite(backprojection_floor), "backprojection_floor", "must be finite");
  require(gospa.p >= 1.0, "gospa.p", "must be at least 1");
  require_positive(gospa.c, "gospa.c");
  require(gospa.alpha > 0.0 && gospa.alpha <= 2.0, "gospa.alpha", "must lie in (0, 2]");
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  const auto wall = [](double x, double y, double nx, double ny, LandmarkType t) {
    return SurfaceSpec{Vec3(x, y, 0.0), Vec3(nx, ny, 0.0), t};
  };
  c.surfaces = {
      wall(80.0, 0.0, 1.0, 0.0, LandmarkType::kSM),
      wall(-80.0, 0.0, -1.0, 0.0, LandmarkType::kMR),
      wall(0.0, 80.0, 0.0, 1.0, LandmarkType::kMR),
      wall(0.0, -80.0, 0.0, -1.0, LandmarkType::kVR),
  };
  Vec7 truth;
  truth << 70.7285, 0.0, 0.0, std::numbers::pi / 2, 22.22, std::numbers::pi / 10, 300.0;
  c.initial_truth = VehicleState::from_vector(truth);
  c.initial_prior_bias << 0.9, 0.9, 0.0, 0.09, 0.0, 0.0, 0.9;
  c.initial_prior_std << 1.0, 1.0, 0.0, 0.1, 0.2, 0.01, 1.0;
  return c;
}

namespace {

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

double read_number(const json& j, const std::string& path) {
  require(j.is_number(), path, "expected a number");
  return j.get<double>();
}

int read_int(const json& j, const std::string& path) {
  require(j.is_number_integer(), path, "expected an integer");
  return j.get<int>();
}

Eigen::VectorXd read_vector(const json& j, const std::string& path, int size) {
  require(j.is_array() && static_cast<int>(j.size()) == size, path,
          "expected an array of " + std::to_string(size) + " numbers");
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = read_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  require(j.is_object(), path.empty() ? "config" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string field = path.empty() ? key : path + "." + key;
    require(allowed.count(key) > 0, field, "unknown field");
  }
}

}  // namespace

json to_json(const ScenarioConfig& c) {
  json surfaces = json::array();
  for (const auto& s : c.surfaces) {
    surfaces.push_back({{"point", vec_json(s.point_on_plane)},
                        {"normal", vec_json(s.unit_normal)},
                        {"type", std::string(to_string(s.type))}});
  }
  json q = json::array();
  for (double s : c.process_noise.std) q.push_back(s * s);
  return json{
      {"bs_position", vec_json(c.bs_position)},
      {"surfaces", surfaces},
      {"initial_truth", vec_json(c.initial_truth.as_vector())},
      {"initial_prior_bias", vec_json(c.initial_prior_bias)},
      {"initial_prior_std", vec_json(c.initial_prior_std)},
      {"steps", c.steps},
      {"dt", c.dt},
      {"particle_count", c.particle_count},
      {"Q", q},
      {"p_D", c.detection_prob},
      {"p_S", c.survival_prob},
      {"clutter_rate", c.clutter_rate},
      {"clutter_region",
       {{"toa_min", c.clutter_region.toa_min},
        {"toa_max", c.clutter_region.toa_max},
        {"el_min", c.clutter_region.el_min},
        {"el_max", c.clutter_region.el_max}}},
      {"birth_weight", c.birth_weight},
      {"birth_std", c.birth_std},
      {"r_min", c.existence_min},
      {"hypothesis_threshold", c.hypothesis_threshold},
      {"max_hypotheses", c.max_hypotheses},
      {"report_threshold", c.report_threshold},
      {"ess_threshold", c.ess_threshold},
      {"lateral_spread", c.lateral_spread},
      {"backprojection_floor", c.backprojection_floor},
      {"gospa", {{"p", c.gospa.p}, {"c", c.gospa.c}, {"alpha", c.gospa.alpha}}},
      {"mode", std::string(to_string(c.mode))},
      {"seed", c.seed},
      {"signal_metadata", c.signal_metadata},
  };
}

ScenarioConfig scenario_from_json(const json& j) {
  check_keys(j, "",
             {"bs_position", "surfaces", "initial_truth", "initial_prior_bias",
              "initial_prior_std", "steps", "dt", "particle_count", "Q", "p_D", "p_S",
              "clutter_rate", "clutter_region", "birth_weight", "birth_std", "r_min",
              "hypothesis_threshold", "max_hypotheses", "report_threshold", "ess_threshold",
              "lateral_spread", "backprojection_floor", "gospa", "mode", "seed",
              "signal_metadata"});
  ScenarioConfig c = default_scenario();
  const auto has = [&](const char* key) { return j.contains(key); };

  if (has("bs_position")) c.bs_position = read_vector(j["bs_position"], "bs_position", 3);
  if (has("surfaces")) {
    const json& arr = j["surfaces"];
    require(arr.is_array(), "surfaces", "expected an array");
    c.surfaces.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "surfaces[" + std::to_string(i) + "]";
      const json& s = arr[i];
      check_keys(s, path, {"point", "normal", "type"});
      for (const char* key : {"point", "normal", "type"}) {
        require(s.contains(key), path + "." + key, "missing field");
      }
      SurfaceSpec spec;
      spec.point_on_plane = read_vector(s["point"], path + ".point", 3);
      spec.unit_normal = read_vector(s["normal"], path + ".normal", 3);
      require(s["type"].is_string(), path + ".type", "expected a string");
      const auto type = parse_landmark_type(s["type"].get<std::string>());
      require(type.has_value(), path + ".type", "unknown landmark type");
      spec.type = *type;
      c.surfaces.push_back(spec);
    }
  }
  if (has("initial_truth")) {
    c.initial_truth = VehicleState::from_vector(read_vector(j["initial_truth"], "initial_truth", 7));
  }
  if (has("initial_prior_bias")) {
    c.initial_prior_bias = read_vector(j["initial_prior_bias"], "initial_prior_bias", 7);
  }
  if (has("initial_prior_std")) {
    c.initial_prior_std = read_vector(j["initial_prior_std"], "initial_prior_std", 7);
  }
  if (has("steps")) c.steps = read_int(j["steps"], "steps");
  if (has("dt")) c.dt = read_number(j["dt"], "dt");
  if (has("particle_count")) c.particle_count = read_int(j["particle_count"], "particle_count");
  if (has("Q")) {
    const Eigen::VectorXd q = read_vector(j["Q"], "Q", 6);
    for (int i = 0; i < 6; ++i) {
      require(q[i] >= 0.0, "Q[" + std::to_string(i) + "]", "variance must be non-negative");
      c.process_noise.std[i] = std::sqrt(q[i]);
    }
  }
  if (has("p_D")) c.detection_prob = read_number(j["p_D"], "p_D");
  if (has("p_S")) c.survival_prob = read_number(j["p_S"], "p_S");
  if (has("clutter_rate")) c.clutter_rate = read_number(j["clutter_rate"], "clutter_rate");
  if (has("clutter_region")) {
    const json& r = j["clutter_region"];
    check_keys(r, "clutter_region", {"toa_min", "toa_max", "el_min", "el_max"});
    if (r.contains("toa_min")) c.clutter_region.toa_min = read_number(r["toa_min"], "clutter_region.toa_min");
    if (r.contains("toa_max")) c.clutter_region.toa_max = read_number(r["toa_max"], "clutter_region.toa_max");
    if (r.contains("el_min")) c.clutter_region.el_min = read_number(r["el_min"], "clutter_region.el_min");
    if (r.contains("el_max")) c.clutter_region.el_max = read_number(r["el_max"], "clutter_region.el_max");
  }
  if (has("birth_weight")) c.birth_weight = read_number(j["birth_weight"], "birth_weight");
  if (has("birth_std")) c.birth_std = read_number(j["birth_std"], "birth_std");
  if (has("r_min")) c.existence_min = read_number(j["r_min"], "r_min");
  if (has("hypothesis_threshold")) {
    c.hypothesis_threshold = read_number(j["hypothesis_threshold"], "hypothesis_threshold");
  }
  if (has("max_hypotheses")) c.max_hypotheses = read_int(j["max_hypotheses"], "max_hypotheses");
  if (has("report_threshold")) {
    c.report_threshold = read_number(j["report_threshold"], "report_threshold");
  }
  if (has("ess_threshold")) c.ess_threshold = read_number(j["ess_threshold"], "ess_threshold");
  if (has("lateral_spread")) c.lateral_spread = read_number(j["lateral_spread"], "lateral_spread");
  if (has("backprojection_floor")) {
    c.backprojection_floor = read_number(j["backprojection_floor"], "backprojection_floor");
  }
  if (has("gospa")) {
    const json& g = j["gospa"];
    check_keys(g, "gospa", {"p", "c", "alpha"});
    if (g.contains("p")) c.gospa.p = read_number(g["p"], "gospa.p");
    if (g.contains("c")) c.gospa.c = read_number(g["c"], "gospa.c");
    if (g.contains("alpha")) c.gospa.alpha = read_number(g["alpha"], "gospa.alpha");
  }
  if (has("mode")) {
    require(j["mode"].is_string(), "mode", "expected a string");
    const auto mode = parse_likelihood_mode(j["mode"].get<std::string>());
    require(mode.has_value(), "mode", "expected all_paths or specular_only");
    c.mode = *mode;
  }
  if (has("seed")) {
    require(j["seed"].is_number_unsigned() ||
                (j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0),
            "seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (has("signal_metadata")) {
    require(j["signal_metadata"].is_object(), "signal_metadata", "expected an object");
    c.signal_metadata = j["signal_metadata"];
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

json map_snapshot(const PmbmMap& map) {
  json bernoullis = json::array();
  for (const auto& track : map.tracks) {
    for (std::size_t h = 0; h < track.hypotheses.size(); ++h) {
      const auto& b = track.hypotheses[h];
      json types = json::object();
      for (LandmarkType t : kAllTypes) {
        const auto& comp = b.density[t];
        if (comp.weight <= 0.0) continue;
        types[std::string(to_string(t))] = {
            {"w", comp.weight}, {"mean", vec_json(comp.mean)}, {"cov", mat_json(comp.cov)}};
      }
      bernoullis.push_back(
          {{"id", track.id}, {"local", h}, {"r", b.existence}, {"types", types}});
    }
  }
  json weights = json::array();
  json locals = json::array();
  for (const auto& g : map.hypotheses) {
    weights.push_back(std::exp(g.log_weight));
    locals.push_back(g.local);
  }
  json undetected = json::object();
  for (LandmarkType t : kSurfaceTypes) {
    undetected[std::string(to_string(t))] = map.undetected.mass[index_of(t)];
  }
  return json{{"bernoullis", bernoullis},
              {"hypothesis_weights", weights},
              {"hypothesis_local", locals},
              {"undetected_mass", undetected}};
}

}  // namespace mmslam
