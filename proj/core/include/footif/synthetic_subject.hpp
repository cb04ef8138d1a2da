#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "footif/device_model.hpp"
#include "footif/direction.hpp"
#include "footif/signal_pipeline.hpp"

namespace footif {

/// Inverse of the kinematic chain: guide lengths from the pose, Hooke's law
/// for channels 1..6, and the pitch torque on a single load cell (f8 = 0 for
/// a positive torque, f7 = 0 for a negative one). Throws OutOfWorkspace.
ForceFrame forces_for_pose(const PedalPose& pose, const DeviceGeometry& geom, double t_s = 0.0);

/// Delta force (N) a channel sees at the end of its travel: k times the
/// compression stroke for 1..6, the pitch-limit torque over the lever for 7/8.
ChannelVector full_scale_forces(const DeviceGeometry& geom);

enum class ProfileShape { MinimumJerk, Trapezoid };

/// Rest, stroke out, hold, stroke back, rest.
struct MotionProfile {
  ProfileShape shape = ProfileShape::MinimumJerk;
  double rest_s = 0.2;
  double duration_s = 2.0;
  double hold_s = 1.0;
  bool return_home = true;
  double sample_rate_hz = 50.0;

  [[nodiscard]] double total_s() const;
  [[nodiscard]] std::size_t frame_count() const;
  /// Progress along the stroke in [0, 1] at time t.
  [[nodiscard]] double progress(double t_s) const;
};

/// Throws Error(InvalidArgument) when a duration is not positive.
void validate_profile(const MotionProfile& profile);

struct SyntheticSubject {
  int id = 1;
  /// Maps intended (x, y, yaw, pitch) commands to executed ones.
  Eigen::Matrix4d distortion = Eigen::Matrix4d::Identity();
  ChannelVector channel_gain = ChannelVector::Ones();
  /// Noise standard deviation as a fraction of each channel's full scale.
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Throws Error(InvalidArgument) for a distortion with condition number >= 100
/// or noise outside [0, 0.2].
void validate_subject(const SyntheticSubject& subject);

/// Commands are scaled to poses by the workspace limits.
PedalPose command_to_pose(const Eigen::Vector4d& command, const DeviceGeometry& geom);

/// The executed pose path of a trial before any sensor effects, one pose per
/// frame. The intended stroke runs from home to the workspace boundary along
/// the direction (a corner for diagonals) and passes through the subject's
/// distortion; `clipped` is set when the result left the workspace.
std::vector<PedalPose> intended_poses(const SyntheticSubject& subject, Direction direction,
                                      const MotionProfile& profile, const DeviceGeometry& geom,
                                      bool* clipped = nullptr);

struct GeneratedTrial {
  TrialRecord record;
  bool clipped = false;
};

/// Deterministic in (subject, direction, dataset, trial, profile, geometry).
GeneratedTrial generate_trial(const SyntheticSubject& subject, Direction direction, const MotionProfile& profile,
                              const DeviceGeometry& geom, int dataset = 1, int trial = 1);

/// splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x);

struct CohortSpec {
  int n_subjects = 10;
  std::uint64_t seed = 1;
  double rotation_min_deg = 10.0;
  double rotation_max_deg = 30.0;
  double skew_max = 0.3;
  double gain_min = 0.8;
  double gain_max = 1.2;
  double channel_gain_min = 0.9;
  double channel_gain_max = 1.1;
  double noise_sigma = 0.05;
  int trials_per_direction = 3;
  MotionProfile profile{};
};

struct Cohort {
  CohortSpec spec;
  std::vector<SyntheticSubject> subjects;
};

/// Draws every subject from `spec.seed`. Subject ids run from 1.
Cohort make_cohort(const CohortSpec& spec);

/// Rotation by `rotation_deg` in the x-y plane, skew coupling from translation
/// into yaw and pitch, then diagonal gains.
Eigen::Matrix4d make_distortion(double rotation_deg, double skew_x_yaw, double skew_y_pitch,
                                const Eigen::Vector4d& gains);

/// Writes `<dir>/manifest.txt` and `<dir>/subject<id>/set<k>/<trial>.csv`.
/// Sets 1 and 2 hold the single directions, set 3 the diagonals; set 2
/// numbers its trials after those of set 1. Returns the number of trial files
/// written.
std::size_t write_cohort(const Cohort& cohort, const DeviceGeometry& geom, const std::filesystem::path& dir);

void write_manifest(std::ostream& out, const Cohort& cohort);
/// Throws Error(ParseError) on a malformed manifest.
Cohort read_manifest(std::istream& in);
Cohort read_manifest(const std::filesystem::path& path);

/// `<dir>/subject<id>/set<k>`.
std::filesystem::path dataset_dir(const std::filesystem::path& dir, int subject, int dataset);

}  // namespace footif
