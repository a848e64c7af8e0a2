#include "mmslam/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mmslam {

namespace {

constexpr double kTiny = 1e-12;

// Global-frame vector expressed in the vehicle frame (rotation about z by -heading).
Vec3 to_vehicle_frame(const Vec3& v, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y(), v.z()};
}

Vec3 to_global_frame(const Vec3& v, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

double clamped_asin(double x) { return std::asin(std::clamp(x, -1.0, 1.0)); }

}  // namespace

std::string_view to_string(LandmarkType t) {
  switch (t) {
    case LandmarkType::kBS:
      return "BS";
    case LandmarkType::kSM:
      return "SM";
    case LandmarkType::kMR:
      return "MR";
    case LandmarkType::kVR:
      return "VR";
  }
  return "?";
}

std::optional<LandmarkType> parse_landmark_type(std::string_view name) {
  for (LandmarkType t : kAllTypes) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

Vec7 VehicleState::as_vector() const {
  Vec7 v;
  v << position, heading, speed, turn_rate, clock_bias;
  return v;
}

VehicleState VehicleState::from_vector(const Vec7& v) {
  VehicleState s;
  s.position = v.head<3>();
  s.heading = v(3);
  s.speed = v(4);
  s.turn_rate = v(5);
  s.clock_bias = v(6);
  return s;
}

Vec5 ChannelParam::as_vector() const {
  Vec5 v;
  v << toa, aoa_az, aoa_el, aod_az, aod_el;
  return v;
}

ChannelParam ChannelParam::from_vector(const Vec5& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, kTwoPi);
  if (w <= 0.0) w += kTwoPi;
  return w - std::numbers::pi;
}

Vec3 direction_from_angles(double az, double el) {
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

Vec3 reflect_bs(const Vec3& bs, const SurfaceSpec& surface) {
  const Vec3& n = surface.unit_normal;
  return bs - 2.0 * (bs - surface.point_on_plane).dot(n) * n;
}

std::optional<ChannelParam> try_measurement_model(const Vec3& point, const VehicleState& state,
                                                  const Vec3& bs, PathKind kind) {
  const Vec3& ue = state.position;
  // For line-of-sight paths the "point" is the transmitter.
  const Vec3& tx = kind == PathKind::kLineOfSight ? point : bs;

  const Vec3 to_point = point - ue;
  const double arrival_len = to_point.norm();
  if (arrival_len < kTiny) return std::nullopt;

  Vec3 departure = kind == PathKind::kLineOfSight ? Vec3(ue - tx) : Vec3(point - tx);
  const double departure_len = departure.norm();
  if (departure_len < kTiny) return std::nullopt;
  departure /= departure_len;

  ChannelParam z;
  z.toa = (kind == PathKind::kLineOfSight ? arrival_len : departure_len + arrival_len) +
          state.clock_bias;
  const Vec3 u = to_vehicle_frame(to_point / arrival_len, state.heading);
  z.aoa_az = std::atan2(u.y(), u.x());
  z.aoa_el = clamped_asin(u.z());
  z.aod_az = std::atan2(departure.y(), departure.x());
  z.aod_el = clamped_asin(departure.z());
  return z;
}

ChannelParam measurement_model(const Vec3& point, const VehicleState& state, const Vec3& bs,
                               PathKind kind) {
  auto z = try_measurement_model(point, state, bs, kind);
  if (!z) throw GeometryError("coincident points");
  return *z;
}

std::optional<SurfaceFrame> try_surface_frame(const Vec3& va, const Vec3& bs) {
  const Vec3 d = bs - va;
  const double len = d.norm();
  if (len < kTiny) return std::nullopt;
  return SurfaceFrame{0.5 * (bs + va), d / len};
}

std::optional<Vec3> try_incidence_point(const Vec3& va, const Vec3& ue, const Vec3& bs) {
  const auto frame = try_surface_frame(va, bs);
  if (!frame) return std::nullopt;
  const Vec3 line = ue - va;
  const double denom = line.dot(frame->normal);
  if (std::abs(denom) < kTiny * std::max(1.0, line.norm())) return std::nullopt;
  const double t = (frame->point - va).dot(frame->normal) / denom;
  return Vec3(va + t * line);
}

Vec3 incidence_point(const Vec3& va, const Vec3& ue, const Vec3& bs) {
  auto x0 = try_incidence_point(va, ue, bs);
  if (!x0) throw GeometryError("degenerate geometry");
  return *x0;
}

std::optional<Vec3> try_backproject(const ChannelParam& z, const VehicleState& state,
                                    const Vec3& bs) {
  const double range = z.toa - state.clock_bias;
  const Vec3 q = bs - state.position;
  const Vec3 u = to_global_frame(direction_from_angles(z.aoa_az, z.aoa_el), state.heading);
  const double denom = 2.0 * (range - u.dot(q));
  if (!(denom > 1e-9)) return std::nullopt;
  const double d2 = (range * range - q.squaredNorm()) / denom;
  if (!std::isfinite(d2) || d2 <= 0.0) return std::nullopt;
  return Vec3(state.position + d2 * u);
}

Vec3 backproject(const ChannelParam& z, const VehicleState& state, const Vec3& bs) {
  auto p = try_backproject(z, state, bs);
  if (!p) throw GeometryError("infeasible geometry");
  return *p;
}

double displacement_from_point(const Vec3& point, const Vec3& va, const Vec3& bs) {
  const auto frame = try_surface_frame(va, bs);
  if (!frame) throw GeometryError("degenerate geometry");
  return frame->normal.dot(point - frame->point);
}

double surface_displacement(const ChannelParam& z, const VehicleState& state,
                            const LandmarkState& landmark, const Vec3& bs) {
  if (landmark.type == LandmarkType::kBS) {
    throw GeometryError("surface displacement is undefined for the BS");
  }
  return displacement_from_point(backproject(z, state, bs), landmark.position, bs);
}

}  // namespace mmslam
