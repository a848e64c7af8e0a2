#include "mmslam/rbpf.hpp"

#include <cmath>
#include <sstream>

namespace mmslam {

VehicleState propagate(const VehicleState& s, double dt) {
  VehicleState out = s;
  const double a = s.heading;
  if (std::abs(s.turn_rate) > 1e-6) {
    const double radius = s.speed / s.turn_rate;
    const double a1 = a + s.turn_rate * dt;
    out.position.x() += radius * (std::sin(a1) - std::sin(a));
    out.position.y() += radius * (-std::cos(a1) + std::cos(a));
  } else {
    out.position.x() += s.speed * dt * std::cos(a);
    out.position.y() += s.speed * dt * std::sin(a);
  }
  out.heading = wrap_angle(a + s.turn_rate * dt);
  return out;
}

VehicleState predict_particle(const VehicleState& state, double dt, const ProcessNoise& noise,
                              Rng& rng) {
  VehicleState s = propagate(state, dt);
  std::normal_distribution<double> normal(0.0, 1.0);
  s.position.x() += noise.std[0] * normal(rng);
  s.position.y() += noise.std[1] * normal(rng);
  s.heading = wrap_angle(s.heading + noise.std[2] * normal(rng));
  s.speed += noise.std[3] * normal(rng);
  s.turn_rate += noise.std[4] * normal(rng);
  s.clock_bias += noise.std[5] * normal(rng);
  return s;
}

void normalize_weights(std::vector<Particle>& particles) {
  std::vector<double> lw;
  lw.reserve(particles.size());
  for (const auto& p : particles) lw.push_back(p.log_weight);
  const double norm = log_sum_exp(lw);
  if (!std::isfinite(norm)) throw FilterDivergence("filter divergence: no particle has positive weight");
  for (auto& p : particles) p.log_weight -= norm;
}

void update_weights(std::vector<Particle>& particles,
                    std::span<const std::vector<double>> hypothesis_log_weights) {
  if (hypothesis_log_weights.size() != particles.size()) {
    throw std::invalid_argument("update_weights: one hypothesis list per particle required");
  }
  for (std::size_t n = 0; n < particles.size(); ++n) {
    particles[n].log_weight += log_sum_exp(hypothesis_log_weights[n]);
  }
  try {
    normalize_weights(particles);
  } catch (const FilterDivergence&) {
    std::ostringstream msg;
    msg << "filter divergence: all " << particles.size() << " particles have zero likelihood";
    if (!particles.empty()) {
      const auto& s = particles.front().state;
      msg << " (first particle at [" << s.position.transpose() << "], heading " << s.heading
          << ", bias " << s.clock_bias << ")";
    }
    throw FilterDivergence(msg.str());
  }
}

double effective_sample_size(const std::vector<Particle>& particles) {
  double sum_sq = 0.0;
  for (const auto& p : particles) {
    const double w = std::exp(p.log_weight);
    sum_sq += w * w;
  }
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

std::vector<std::size_t> systematic_resample_indices(std::span<const double> weights, double u0) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> out;
  out.reserve(n);
  double total = 0.0;
  for (double w : weights) total += w;
  double cumulative = weights.empty() ? 0.0 : weights[0] / total;
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (u0 + static_cast<double>(k)) / static_cast<double>(n);
    while (u > cumulative && i + 1 < n) {
      ++i;
      cumulative += weights[i] / total;
    }
    out.push_back(i);
  }
  return out;
}

bool resample(std::vector<Particle>& particles, double ess_threshold_fraction, Rng& rng) {
  const std::size_t n = particles.size();
  if (n == 0) return false;
  if (effective_sample_size(particles) >= ess_threshold_fraction * static_cast<double>(n)) {
    return false;
  }
  std::vector<double> w;
  w.reserve(n);
  for (const auto& p : particles) w.push_back(std::exp(p.log_weight));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto ancestors = systematic_resample_indices(w, unit(rng));

  std::vector<Particle> next;
  next.reserve(n);
  const double log_uniform = -std::log(static_cast<double>(n));
  for (std::size_t a : ancestors) {
    next.push_back(particles[a]);
    next.back().log_weight = log_uniform;
  }
  particles = std::move(next);
  return true;
}

VehicleState estimate_state(const std::vector<Particle>& particles) {
  VehicleState out;
  out.position.setZero();
  double sin_sum = 0.0;
  double cos_sum = 0.0;
  for (const auto& p : particles) {
    const double w = std::exp(p.log_weight);
    out.position += w * p.state.position;
    out.speed += w * p.state.speed;
    out.turn_rate += w * p.state.turn_rate;
    out.clock_bias += w * p.state.clock_bias;
    sin_sum += w * std::sin(p.state.heading);
    cos_sum += w * std::cos(p.state.heading);
  }
  out.heading = std::atan2(sin_sum, cos_sum);
  return out;
}

}  // namespace mmslam
