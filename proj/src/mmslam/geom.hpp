#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmslam {

using Vec3 = Eigen::Vector3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Landmark class. BS is the line-of-sight source; the others are surface
/// roughness classes (smooth, medium rough, very rough).
enum class LandmarkType : int { kBS = 0, kSM = 1, kMR = 2, kVR = 3 };

inline constexpr int kNumLandmarkTypes = 4;
inline constexpr LandmarkType kAllTypes[kNumLandmarkTypes] = {
    LandmarkType::kBS, LandmarkType::kSM, LandmarkType::kMR, LandmarkType::kVR};
inline constexpr LandmarkType kSurfaceTypes[3] = {LandmarkType::kSM, LandmarkType::kMR,
                                                  LandmarkType::kVR};

constexpr int index_of(LandmarkType t) { return static_cast<int>(t); }
std::string_view to_string(LandmarkType t);
std::optional<LandmarkType> parse_landmark_type(std::string_view name);

/// Thrown for configurations where a geometric quantity is undefined.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vehicle state. Clock bias is stored in meters (bias times c).
struct VehicleState {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;
  double speed = 0.0;
  double turn_rate = 0.0;
  double clock_bias = 0.0;

  /// [x, y, z, heading, speed, turn_rate, clock_bias]
  Vec7 as_vector() const;
  static VehicleState from_vector(const Vec7& v);
};

struct SurfaceSpec {
  Vec3 point_on_plane = Vec3::Zero();
  Vec3 unit_normal = Vec3::UnitX();
  LandmarkType type = LandmarkType::kSM;
};

/// Filter-side landmark: the VA position (or the BS position for type BS).
struct LandmarkState {
  Vec3 position = Vec3::Zero();
  LandmarkType type = LandmarkType::kBS;
};

/// One channel-parameter estimate. Delay is range-equivalent (meters); AOA is
/// in the vehicle frame, AOD in the global frame.
struct ChannelParam {
  double toa = 0.0;
  double aoa_az = 0.0;
  double aoa_el = 0.0;
  double aod_az = 0.0;
  double aod_el = 0.0;

  Vec5 as_vector() const;
  static ChannelParam from_vector(const Vec5& v);
};

enum class PathKind { kLineOfSight, kReflected };

/// Wraps to (-pi, pi].
double wrap_angle(double a);

Vec3 reflect_bs(const Vec3& bs, const SurfaceSpec& surface);

/// Channel parameters of a path through `point`. For line-of-sight paths
/// `point` is the BS position itself.
ChannelParam measurement_model(const Vec3& point, const VehicleState& state, const Vec3& bs,
                               PathKind kind);
std::optional<ChannelParam> try_measurement_model(const Vec3& point, const VehicleState& state,
                                                  const Vec3& bs, PathKind kind);

/// Plane implied by a VA: x_e is the BS/VA midpoint, e points from VA to BS.
struct SurfaceFrame {
  Vec3 point;
  Vec3 normal;
};
std::optional<SurfaceFrame> try_surface_frame(const Vec3& va, const Vec3& bs);

/// Specular incidence point: intersection of the VA-UE line with the surface.
Vec3 incidence_point(const Vec3& va, const Vec3& ue, const Vec3& bs);
std::optional<Vec3> try_incidence_point(const Vec3& va, const Vec3& ue, const Vec3& bs);

/// Scatter point implied by delay and AOA of a single-bounce path.
Vec3 backproject(const ChannelParam& z, const VehicleState& state, const Vec3& bs);
std::optional<Vec3> try_backproject(const ChannelParam& z, const VehicleState& state,
                                    const Vec3& bs);

/// Signed offset of a back-projected point from the surface implied by `va`,
/// measured along the normal pointing toward the BS.
double displacement_from_point(const Vec3& point, const Vec3& va, const Vec3& bs);

double surface_displacement(const ChannelParam& z, const VehicleState& state,
                            const LandmarkState& landmark, const Vec3& bs);

/// Unit direction in the vehicle frame for an (azimuth, elevation) pair.
Vec3 direction_from_angles(double az, double el);

}  // namespace mmslam
