#include "mmslam/pmbm.hpp"

#include "mmslam/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

namespace mmslam {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kAngular[] = {1, 3};

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

}  // namespace

double log_sum_exp(const std::vector<double>& values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

// ---------------------------------------------------------------------------
// LandmarkDensity

LandmarkType LandmarkDensity::map_type() const {
  int best = 0;
  for (int t = 1; t < kNumLandmarkTypes; ++t) {
    if (components[t].weight > components[best].weight) best = t;
  }
  return static_cast<LandmarkType>(best);
}

double LandmarkDensity::total_weight() const {
  double s = 0.0;
  for (const auto& c : components) s += c.weight;
  return s;
}

void LandmarkDensity::normalize() {
  const double s = total_weight();
  if (s <= 0.0) return;
  for (auto& c : components) c.weight /= s;
}

double UndetectedIntensity::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

// ---------------------------------------------------------------------------
// Evidence

GeometricEvidence::GeometricEvidence(const ClusterMeasurement& cluster, const VehicleState& state,
                                     const Vec3& bs, const LikelihoodConfig& config)
    : size_(static_cast<int>(cluster.size())), state_(state), bs_(bs), config_(&config) {
  if (cluster.empty()) return;
  const std::size_t first = first_path_index(cluster);
  first_channel_ = cluster[first];
  first_ = first_channel_.as_vector();
  for (std::size_t l = 0; l < cluster.size(); ++l) {
    if (l == first) continue;
    if (auto p = try_backproject(cluster[l], state, bs)) {
      scatter_.push_back(*p);
    } else {
      ++failed_;
    }
  }
}

double GeometricEvidence::log_cardinality(LandmarkType type) const {
  return log_cardinality_pmf(size_, type, *config_);
}

std::optional<Vec5> GeometricEvidence::specular_mean(const Vec3& landmark,
                                                     LandmarkType type) const {
  return mmslam::specular_mean({landmark, type}, state_, bs_, config_->at(type));
}

Vec5 GeometricEvidence::specular_var(LandmarkType type) const {
  return config_->at(type).specular_var;
}

std::optional<double> GeometricEvidence::displacement(int path, const Vec3& landmark) const {
  const auto frame = try_surface_frame(landmark, bs_);
  if (!frame) return std::nullopt;
  return frame->normal.dot(scatter_[path] - frame->point);
}

double GeometricEvidence::diffuse_mean(LandmarkType type) const {
  return config_->at(type).diffuse_mean;
}

double GeometricEvidence::diffuse_var(LandmarkType type) const {
  const double s = config_->at(type).diffuse_std;
  return s * s;
}

// ---------------------------------------------------------------------------
// Moment matching

MomentMatchResult moment_match_update(const LandmarkDensity& density,
                                      const ClusterEvidence& evidence,
                                      const SigmaPointOptions& options, double gate) {
  MomentMatchResult out;
  out.density = density;
  out.type_log_marginal.fill(kNegInf);
  if (evidence.cluster_size() == 0) return out;

  std::array<double, kNumLandmarkTypes> log_weighted;
  log_weighted.fill(kNegInf);

  for (LandmarkType t : kAllTypes) {
    const TypeComponent& prior = density[t];
    if (!(prior.weight > 0.0)) continue;
    const double log_card = evidence.log_cardinality(t);
    if (log_card == kNegInf) continue;

    const MeasurementFunction specular = [&](const Eigen::VectorXd& x) -> std::optional<Eigen::VectorXd> {
      auto m = evidence.specular_mean(x.head<3>(), t);
      if (!m) return std::nullopt;
      return Eigen::VectorXd(*m);
    };
    const Eigen::MatrixXd r1 = evidence.specular_var(t).asDiagonal();
    auto stage1 = sigma_point_condition(prior.mean, prior.cov, specular, evidence.first_path(), r1,
                                        kAngular, options);
    if (!stage1 || stage1->mahalanobis > gate) continue;
    out.regularized = out.regularized || stage1->regularized;

    double log_marginal = log_card + stage1->log_marginal;
    Eigen::VectorXd mean = std::move(stage1->mean);
    Eigen::MatrixXd cov = std::move(stage1->cov);

    if (evidence.uses_diffuse(t)) {
      log_marginal += evidence.failed_diffuse_count() * evidence.floor();
      const int count = evidence.diffuse_count();
      if (count > 0) {
        const MeasurementFunction displacement =
            [&](const Eigen::VectorXd& x) -> std::optional<Eigen::VectorXd> {
          Eigen::VectorXd d(count);
          const Vec3 lm = x.head<3>();
          for (int l = 0; l < count; ++l) {
            auto v = evidence.displacement(l, lm);
            if (!v) return std::nullopt;
            d(l) = *v;
          }
          return d;
        };
        const Eigen::VectorXd z = Eigen::VectorXd::Constant(count, evidence.diffuse_mean(t));
        const Eigen::MatrixXd r2 =
            evidence.diffuse_var(t) * Eigen::MatrixXd::Identity(count, count);
        auto stage2 = sigma_point_condition(mean, cov, displacement, z, r2, {}, options);
        if (!stage2) continue;
        out.regularized = out.regularized || stage2->regularized;
        log_marginal += stage2->log_marginal;
        mean = std::move(stage2->mean);
        cov = std::move(stage2->cov);
      }
    }

    out.type_log_marginal[index_of(t)] = log_marginal;
    log_weighted[index_of(t)] = std::log(prior.weight) + log_marginal;
    out.density[t].mean = mean;
    out.density[t].cov = cov;
  }

  out.log_marginal =
      log_sum_exp(std::vector<double>(log_weighted.begin(), log_weighted.end()));
  if (out.log_marginal == kNegInf) {
    out.density = density;
    return out;
  }
  for (int t = 0; t < kNumLandmarkTypes; ++t) {
    const double w = std::exp(log_weighted[t] - out.log_marginal);
    if (w == 0.0) out.density.components[t] = density.components[t];
    out.density.components[t].weight = w;
  }
  return out;
}

MomentMatchResult moment_match_update(const LandmarkDensity& density,
                                      const ClusterMeasurement& cluster,
                                      const VehicleState& state, const Vec3& bs,
                                      const LikelihoodConfig& config) {
  const GeometricEvidence evidence(cluster, state, bs, config);
  return moment_match_update(density, evidence);
}

// ---------------------------------------------------------------------------
// Map operations

PmbmMap PmbmMap::with_base_station(const Vec3& bs) {
  PmbmMap map;
  Bernoulli b;
  b.existence = 1.0;
  b.density[LandmarkType::kBS] = TypeComponent{1.0, bs, 1e-6 * Mat3::Identity()};
  map.tracks.push_back(Track{0, {b}});
  map.hypotheses = {GlobalHypothesis{0.0, {0}}};
  map.next_id = 1;
  return map;
}

void predict_map(PmbmMap& map, double survival_prob, double birth_weight) {
  for (LandmarkType t : kSurfaceTypes) {
    auto& m = map.undetected.mass[index_of(t)];
    m = survival_prob * m + birth_weight;
  }
  for (auto& track : map.tracks) {
    for (auto& b : track.hypotheses) b.existence *= survival_prob;
  }
}

std::optional<LandmarkDensity> birth_density(const ClusterMeasurement& cluster,
                                             const VehicleState& state,
                                             const UndetectedIntensity& undetected,
                                             const UpdateContext& context) {
  if (cluster.empty()) return std::nullopt;
  const ChannelParam& first = cluster[first_path_index(cluster)];
  const int n = static_cast<int>(cluster.size());
  const Vec3& bs = context.bs;
  const double var = context.params.birth_std * context.params.birth_std;

  LandmarkDensity density;
  bool any = false;
  for (LandmarkType t : kSurfaceTypes) {
    const double mass = undetected.mass[index_of(t)];
    if (!(mass > 0.0)) continue;
    if (log_cardinality_pmf(n, t, context.likelihood) == kNegInf) continue;
    const auto& stats = context.likelihood.at(t);
    const ChannelParam debiased = ChannelParam::from_vector(first.as_vector() - stats.specular_bias);
    const auto incidence = try_backproject(debiased, state, bs);
    if (!incidence) continue;
    // Surface normal at a specular point bisects the directions to BS and UE.
    const Vec3 to_bs = bs - *incidence;
    const Vec3 to_ue = state.position - *incidence;
    if (to_bs.norm() < 1e-9 || to_ue.norm() < 1e-9) continue;
    const Vec3 bisector = to_bs.normalized() + to_ue.normalized();
    if (bisector.norm() < 1e-9) continue;
    const SurfaceSpec plane{*incidence, bisector.normalized(), t};
    density[t] = TypeComponent{mass, reflect_bs(bs, plane), var * Mat3::Identity()};
    any = true;
  }
  if (!any) return std::nullopt;
  return density;
}

namespace {

struct DetectionOutcome {
  double log_weight = kNegInf;
  Bernoulli posterior;
};

struct BirthOutcome {
  double log_weight = kNegInf;  ///< log l_U
  Bernoulli bernoulli;
};

}  // namespace

MapUpdateResult update_map(PmbmMap& map, const Scan& scan, const VehicleState& state,
                           const UpdateContext& context) {
  const PmbmParams& params = context.params;
  const double p_d = params.detection_prob;
  const double log_p_d = safe_log(p_d);
  const int m = static_cast<int>(scan.size());
  MapUpdateResult result;

  std::vector<GeometricEvidence> evidence;
  evidence.reserve(m);
  for (const auto& cluster : scan) evidence.emplace_back(cluster, state, context.bs, context.likelihood);

  // Landmarks detected for the first time.
  std::vector<BirthOutcome> births(m);
  for (int i = 0; i < m; ++i) {
    const double log_clutter = safe_log(clutter_weight(scan[i], context.scan));
    double log_rho = kNegInf;
    if (auto prior = birth_density(scan[i], state, map.undetected, context)) {
      auto mm = moment_match_update(*prior, evidence[i], params.sigma_points, params.gate);
      result.regularized = result.regularized || mm.regularized;
      if (mm.log_marginal != kNegInf) {
        log_rho = log_p_d + mm.log_marginal;
        births[i].bernoulli.density = mm.density;
        births[i].bernoulli.density.normalize();
      }
    }
    const double log_total = log_add_exp(log_clutter, log_rho);
    births[i].bernoulli.existence = log_total == kNegInf ? 0.0 : std::exp(log_rho - log_total);
    births[i].log_weight = log_total == kNegInf ? params.unexplained_log_weight : log_total;
  }

  // Local hypotheses of existing tracks: misdetection and detection outcomes.
  const std::size_t num_tracks = map.tracks.size();
  std::vector<std::vector<char>> referenced(num_tracks);
  for (std::size_t j = 0; j < num_tracks; ++j) {
    referenced[j].assign(map.tracks[j].hypotheses.size(), 0);
  }
  for (const auto& h : map.hypotheses) {
    for (std::size_t j = 0; j < num_tracks; ++j) {
      if (h.local[j] >= 0) referenced[j][h.local[j]] = 1;
    }
  }

  std::vector<std::vector<Bernoulli>> missed(num_tracks);
  std::vector<std::vector<double>> log_missed(num_tracks);
  std::vector<std::vector<std::vector<DetectionOutcome>>> detected(num_tracks);
  for (std::size_t j = 0; j < num_tracks; ++j) {
    const auto& track = map.tracks[j];
    const std::size_t n_local = track.hypotheses.size();
    missed[j].resize(n_local);
    log_missed[j].assign(n_local, kNegInf);
    detected[j].resize(n_local);
    for (std::size_t a = 0; a < n_local; ++a) {
      if (!referenced[j][a]) continue;
      const Bernoulli& prior = track.hypotheses[a];
      const double r = prior.existence;
      const double keep = 1.0 - p_d * r;
      missed[j][a] = prior;
      missed[j][a].existence = keep > 0.0 ? (1.0 - p_d) * r / keep : 0.0;
      log_missed[j][a] = std::log(std::max(keep, 1e-300));

      detected[j][a].resize(m);
      if (!(r > 0.0)) continue;
      for (int i = 0; i < m; ++i) {
        auto mm = moment_match_update(prior.density, evidence[i], params.sigma_points, params.gate);
        if (mm.log_marginal == kNegInf) continue;
        result.regularized = result.regularized || mm.regularized;
        auto& out = detected[j][a][i];
        out.log_weight = std::log(r) + log_p_d + mm.log_marginal;
        out.posterior.existence = 1.0;
        out.posterior.density = std::move(mm.density);
      }
    }
  }

  // New global hypotheses from the k-best associations of each predecessor.
  std::vector<double> prior_log_w;
  for (const auto& h : map.hypotheses) prior_log_w.push_back(h.log_weight);
  const double prior_norm = log_sum_exp(prior_log_w);

  std::vector<Track> new_tracks(num_tracks);
  std::vector<std::map<std::pair<int, int>, int>> child_index(num_tracks);
  for (std::size_t j = 0; j < num_tracks; ++j) new_tracks[j].id = map.tracks[j].id;

  auto child = [&](std::size_t j, int a, int i) {
    auto [it, inserted] = child_index[j].try_emplace({a, i}, 0);
    if (inserted) {
      it->second = static_cast<int>(new_tracks[j].hypotheses.size());
      new_tracks[j].hypotheses.push_back(i < 0 ? missed[j][a] : detected[j][a][i].posterior);
    }
    return it->second;
  };

  std::vector<GlobalHypothesis> next;
  for (const auto& h : map.hypotheses) {
    const double log_w = h.log_weight - prior_norm;
    std::vector<std::size_t> present;
    for (std::size_t j = 0; j < num_tracks; ++j) {
      if (h.local[j] >= 0) present.push_back(j);
    }
    const auto n_present = static_cast<Eigen::Index>(present.size());
    Eigen::MatrixXd log_detect(m, n_present);
    Eigen::VectorXd log_miss(n_present);
    Eigen::VectorXd log_new(m);
    for (Eigen::Index c = 0; c < n_present; ++c) {
      const std::size_t j = present[c];
      const int a = h.local[j];
      log_miss(c) = log_missed[j][a];
      for (int i = 0; i < m; ++i) log_detect(i, c) = detected[j][a][i].log_weight;
    }
    for (int i = 0; i < m; ++i) log_new(i) = births[i].log_weight;

    const AssociationCosts costs = build_cost_matrix(log_detect, log_miss, log_new);
    const int k = std::max(1, static_cast<int>(std::ceil(params.max_hypotheses * std::exp(log_w) - 1e-12)));
    std::vector<Assignment> best =
        m == 0 ? std::vector<Assignment>{Assignment{}} : murty_k_best(costs.cost, k);

    for (const Assignment& assignment : best) {
      GlobalHypothesis g;
      g.log_weight = log_w + costs.constant - assignment.cost;
      g.local.assign(num_tracks + m, -1);
      std::vector<int> row_of(n_present, -1);
      for (int i = 0; i < m; ++i) {
        const int col = assignment.row_to_col[i];
        if (col < n_present) {
          row_of[col] = i;
        } else {
          g.local[num_tracks + i] = 0;  // birth
        }
      }
      for (Eigen::Index c = 0; c < n_present; ++c) {
        const std::size_t j = present[c];
        g.local[j] = child(j, h.local[j], row_of[c]);
      }
      next.push_back(std::move(g));
    }
  }

  for (int i = 0; i < m; ++i) {
    new_tracks.push_back(Track{map.next_id++, {births[i].bernoulli}});
  }
  map.tracks = std::move(new_tracks);
  map.hypotheses = std::move(next);
  for (const auto& g : map.hypotheses) result.hypothesis_log_weights.push_back(g.log_weight);
  normalize_hypotheses(map);

  for (LandmarkType t : kSurfaceTypes) map.undetected.mass[index_of(t)] *= 1.0 - p_d;
  return result;
}

void normalize_hypotheses(PmbmMap& map) {
  std::vector<double> w;
  for (const auto& h : map.hypotheses) w.push_back(h.log_weight);
  const double norm = log_sum_exp(w);
  if (norm == kNegInf) return;
  for (auto& h : map.hypotheses) h.log_weight -= norm;
}

void prune(PmbmMap& map, const PruneThresholds& thresholds) {
  normalize_hypotheses(map);
  const std::size_t num_tracks = map.tracks.size();

  // Global hypotheses: relative threshold, then cap.
  std::vector<GlobalHypothesis> kept;
  const double log_threshold = std::log(thresholds.hypothesis_threshold);
  for (auto& h : map.hypotheses) {
    if (h.log_weight >= log_threshold) kept.push_back(std::move(h));
  }
  if (kept.empty() && !map.hypotheses.empty()) {
    auto best = std::max_element(map.hypotheses.begin(), map.hypotheses.end(),
                                 [](const auto& a, const auto& b) { return a.log_weight < b.log_weight; });
    kept.push_back(std::move(*best));
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.log_weight > b.log_weight; });
  if (thresholds.max_hypotheses > 0 && static_cast<int>(kept.size()) > thresholds.max_hypotheses) {
    kept.resize(thresholds.max_hypotheses);
  }

  // Bernoullis with negligible existence.
  for (auto& h : kept) {
    for (std::size_t j = 0; j < num_tracks; ++j) {
      const int a = h.local[j];
      if (a >= 0 && map.tracks[j].hypotheses[a].existence < thresholds.existence_min) h.local[j] = -1;
    }
  }

  // Merge hypotheses that became identical.
  std::vector<GlobalHypothesis> merged;
  std::map<std::vector<int>, std::size_t> seen;
  for (auto& h : kept) {
    auto [it, inserted] = seen.try_emplace(h.local, merged.size());
    if (inserted) {
      merged.push_back(std::move(h));
    } else {
      auto& target = merged[it->second];
      target.log_weight = log_add_exp(target.log_weight, h.log_weight);
    }
  }

  // Compact local hypotheses and tracks.
  std::vector<Track> tracks;
  std::vector<int> track_map(num_tracks, -1);
  std::vector<std::vector<int>> local_map(num_tracks);
  for (std::size_t j = 0; j < num_tracks; ++j) {
    local_map[j].assign(map.tracks[j].hypotheses.size(), -1);
    Track compact{map.tracks[j].id, {}};
    for (const auto& h : merged) {
      const int a = h.local[j];
      if (a >= 0 && local_map[j][a] < 0) {
        local_map[j][a] = static_cast<int>(compact.hypotheses.size());
        compact.hypotheses.push_back(map.tracks[j].hypotheses[a]);
      }
    }
    if (!compact.hypotheses.empty()) {
      track_map[j] = static_cast<int>(tracks.size());
      tracks.push_back(std::move(compact));
    }
  }
  for (auto& h : merged) {
    std::vector<int> local(tracks.size(), -1);
    for (std::size_t j = 0; j < num_tracks; ++j) {
      if (track_map[j] >= 0 && h.local[j] >= 0) local[track_map[j]] = local_map[j][h.local[j]];
    }
    h.local = std::move(local);
  }
  map.tracks = std::move(tracks);
  map.hypotheses = std::move(merged);
  if (map.hypotheses.empty()) map.hypotheses.push_back(GlobalHypothesis{0.0, {}});
  normalize_hypotheses(map);
}

std::vector<LandmarkEstimate> estimate_map(const PmbmMap& map, double report_threshold) {
  std::vector<LandmarkEstimate> out;
  if (map.hypotheses.empty()) return out;
  const auto best = std::max_element(
      map.hypotheses.begin(), map.hypotheses.end(),
      [](const auto& a, const auto& b) { return a.log_weight < b.log_weight; });
  for (std::size_t j = 0; j < map.tracks.size(); ++j) {
    const int a = best->local[j];
    if (a < 0) continue;
    const Bernoulli& b = map.tracks[j].hypotheses[a];
    if (!(b.existence > report_threshold)) continue;
    const LandmarkType type = b.density.map_type();
    out.push_back({map.tracks[j].id, b.density[type].mean, type, b.existence});
  }
  return out;
}

}  // namespace mmslam
