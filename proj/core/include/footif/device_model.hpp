#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace footif {

inline constexpr std::size_t kPlanarSprings = 6;
inline constexpr std::size_t kChannels = 8;

using ChannelVector = Eigen::Matrix<double, 8, 1>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Where the compression springs sit relative to the base. The shipped device
/// mounts them outside the base so a guide lengthening compresses its spring;
/// InsideBase models the earlier design where each spring is a compressive
/// strut between A_i and B_i.
enum class SpringPlacement { OutsideBase, InsideBase };

/// One of the six compression springs on the planar guides.
struct CompressionSpring {
  double stiffness_n_per_cm = 0.02;
  double free_length_cm = 6.0;
  double installed_length_cm = 3.2;
  double fully_compressed_length_cm = 1.2;
  double pretension_n = 5.6;

  /// Guide travel (cm) from home until the spring is solid.
  [[nodiscard]] double compression_stroke_cm() const {
    return installed_length_cm - fully_compressed_length_cm;
  }
};

/// One of the two pitch torsion springs. Stiffness is kept in N*cm/rad.
struct TorsionSpring {
  double stiffness_ncm_per_rad = 46.3 * 180.0 / std::numbers::pi;
  double pretension_n = 0.0;
};

struct SpringBank {
  std::array<CompressionSpring, kPlanarSprings> compression{};
  std::array<TorsionSpring, 2> torsion{};
};

/// Symmetric limits of the 4-DOF workspace; boundaries are inclusive.
struct WorkspaceLimits {
  double translation_cm = 2.0;
  double yaw_rad = deg_to_rad(12.5);
  double pitch_rad = deg_to_rad(10.0);
};

/// Construction parameters. Frame convention: y points forward (toe), x to the
/// right, yaw positive counter-clockwise seen from above, pitch positive when
/// the sole (load cell 7) is pressed down.
///
/// Spring layout (base point A_i, mobile-frame point B_i):
///   1: front guide, A = (0,  a/2),   B = (0,  a'/2)
///   2: back guide,  A = (0, -a/2),   B = (0, -a'/2)
///   3: left-front,  A = (-b/2,  c/2), B = (-b'/2,  c'/2)
///   4: right-front, A = ( b/2,  c/2), B = ( b'/2,  c'/2)
///   5: left-back,   A = (-b/2, -c/2), B = (-b'/2, -c'/2)
///   6: right-back,  A = ( b/2, -c/2), B = ( b'/2, -c'/2)
struct GeometryParams {
  double base_length_cm = 30.0;         // a
  double base_width_cm = 30.0;          // b
  double mf_length_cm = 20.0;           // a'
  double mf_width_cm = 20.0;            // b'
  double base_guide_spacing_cm = 16.0;  // c
  double mf_guide_spacing_cm = 12.0;    // c'
  double sole_lever_cm = 8.0;           // b7
  double heel_lever_cm = 8.0;           // b8
  double reference_offset_cm = 11.5;    // d
  WorkspaceLimits limits{};
  SpringBank springs{};
  SpringPlacement placement = SpringPlacement::OutsideBase;
};

/// Immutable, validated device description.
class DeviceGeometry {
 public:
  /// Throws Error(InvalidGeometry) when an invariant fails.
  explicit DeviceGeometry(const GeometryParams& params);

  /// The shipped default (see config/default.conf).
  static DeviceGeometry defaults() { return DeviceGeometry(GeometryParams{}); }

  [[nodiscard]] const GeometryParams& params() const { return params_; }
  [[nodiscard]] const WorkspaceLimits& limits() const { return params_.limits; }
  [[nodiscard]] const SpringBank& springs() const { return params_.springs; }
  [[nodiscard]] SpringPlacement placement() const { return params_.placement; }

  /// 0-based spring index.
  [[nodiscard]] const Eigen::Vector2d& base_point(std::size_t i) const { return base_points_[i]; }
  [[nodiscard]] const Eigen::Vector2d& mobile_point(std::size_t i) const { return mobile_points_[i]; }
  /// L_0i, guide length at home.
  [[nodiscard]] double home_length(std::size_t i) const { return home_lengths_[i]; }
  [[nodiscard]] const Vector6d& home_lengths() const { return home_lengths_; }

  /// Load-cell reading for each channel at home.
  [[nodiscard]] ChannelVector pretension() const;

  /// Same device with the other spring placement.
  [[nodiscard]] DeviceGeometry with_placement(SpringPlacement placement) const;

  // Closed-form intermediates shared by the kinematics.
  [[nodiscard]] double closure_m() const;  // ab + a'b'
  [[nodiscard]] double closure_q() const;  // ab' + a'b
  [[nodiscard]] double closure_p() const;  // bc' - b'c

 private:
  GeometryParams params_;
  std::array<Eigen::Vector2d, kPlanarSprings> base_points_;
  std::array<Eigen::Vector2d, kPlanarSprings> mobile_points_;
  Vector6d home_lengths_;
};

struct PedalPose {
  double x_cm = 0.0;
  double y_cm = 0.0;
  double yaw_rad = 0.0;
  double pitch_rad = 0.0;

  [[nodiscard]] Eigen::Vector3d planar() const { return {x_cm, y_cm, yaw_rad}; }
  [[nodiscard]] Eigen::Vector4d as_vector() const { return {x_cm, y_cm, yaw_rad, pitch_rad}; }
  static PedalPose from_vector(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
  bool operator==(const PedalPose&) const = default;
};

/// Pose with angles given in degrees.
inline PedalPose pose_deg(double x_cm, double y_cm, double yaw_deg, double pitch_deg) {
  return {x_cm, y_cm, deg_to_rad(yaw_deg), deg_to_rad(pitch_deg)};
}

/// One timestamped sample of the eight load cells (N).
struct ForceFrame {
  double t_s = 0.0;
  ChannelVector force_n = ChannelVector::Zero();
};

/// Throws Error(InvalidArgument) unless every reading is finite and >= 0.
void validate_frame(const ForceFrame& frame);
/// Also checks that timestamps strictly increase.
void validate_frames(const std::vector<ForceFrame>& frames);

struct GuideLengths {
  Vector6d cm = Vector6d::Zero();
  double operator[](std::size_t i) const { return cm[static_cast<Eigen::Index>(i)]; }
};

/// Result of the closed-form planar solve.
struct PlanarPose {
  double x_cm = 0.0;
  double y_cm = 0.0;
  double yaw_rad = 0.0;
};

enum class Mode { Elastic, Isometric };

struct ContactMode {
  Mode mode = Mode::Elastic;
  /// 1-based element indices: 1..6 fully compressed springs, 7/8 pitch stop.
  std::vector<int> saturated;
};

struct PitchEstimate {
  double pitch_rad = 0.0;      // clamped to the workspace
  double unclamped_rad = 0.0;  // M_x / K_p
  double moment_ncm = 0.0;     // M_x
};

GuideLengths inverse_kinematics(const PedalPose& pose, const DeviceGeometry& geom);

/// Closed-form planar forward kinematics. Throws OutOfDomain when |E| > 2|P|
/// and SingularDenominator when the x/y denominator vanishes.
PlanarPose forward_kinematics(const GuideLengths& lengths, const DeviceGeometry& geom);

/// Hooke's law: L_i = L_0i + (f_ci - f_0i) / k_i.
GuideLengths lengths_from_forces(const ForceFrame& frame, const DeviceGeometry& geom);

/// Physical length of spring i (0-based) for a given guide length.
double spring_length(std::size_t i, double guide_length_cm, const DeviceGeometry& geom);

PitchEstimate pitch_from_forces(double f7_n, double f8_n, const DeviceGeometry& geom);

/// Hooke lengths through the planar solve, then clamped to the workspace, so a
/// frame that keeps pushing past a limit lands on the boundary.
PedalPose pose_from_forces(const ForceFrame& frame, const DeviceGeometry& geom);

ContactMode mode_classify(const ForceFrame& frame, const DeviceGeometry& geom);

bool workspace_contains(const PedalPose& pose, const DeviceGeometry& geom);

PedalPose clamp_to_workspace(const PedalPose& pose, const DeviceGeometry& geom);

}  // namespace footif
