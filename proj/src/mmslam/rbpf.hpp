#pragma once

#include "mmslam/chanmodel.hpp"
#include "mmslam/geom.hpp"
#include "mmslam/pmbm.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace mmslam {

/// Standard deviations of the additive process noise on
/// (x, y, heading, speed, turn_rate, clock_bias). Height is noiseless.
struct ProcessNoise {
  std::array<double, 6> std{0.2, 0.2, 0.01, 0.2, 0.01, 0.2};
};

/// Noiseless constant-turn-rate transition.
VehicleState propagate(const VehicleState& state, double dt);

VehicleState predict_particle(const VehicleState& state, double dt, const ProcessNoise& noise,
                              Rng& rng);

struct Particle {
  VehicleState state;
  double log_weight = 0.0;
  PmbmMap map;
};

class FilterDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log w <- log w + log sum_h l^h, then normalize across particles.
/// Throws FilterDivergence when every particle has zero mass.
void update_weights(std::vector<Particle>& particles,
                    std::span<const std::vector<double>> hypothesis_log_weights);

void normalize_weights(std::vector<Particle>& particles);

double effective_sample_size(const std::vector<Particle>& particles);

/// Ancestor indices of systematic resampling with offset u0 in [0, 1).
std::vector<std::size_t> systematic_resample_indices(std::span<const double> weights, double u0);

/// Resamples systematically when ESS < threshold * N. Returns whether it did.
bool resample(std::vector<Particle>& particles, double ess_threshold_fraction, Rng& rng);

/// Weighted mean; heading uses the circular mean.
VehicleState estimate_state(const std::vector<Particle>& particles);

}  // namespace mmslam
