#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "footif/device_model.hpp"
#include "footif/direction.hpp"

namespace footif {

/// Identity of a trial file: `subject<id>_<direction>_<trial>.csv`.
struct TrialId {
  int subject = 0;
  Direction direction = Direction::F;
  int trial = 0;
  bool operator==(const TrialId&) const = default;
};

std::string trial_filename(const TrialId& id);
std::optional<TrialId> parse_trial_filename(const std::string& filename);

struct TrialRecord {
  TrialId id;
  std::vector<ForceFrame> frames;
};

/// Throws Error(InvalidArgument) unless the record has >= 2 valid frames with
/// a nominal 50 Hz spacing (0.02 s +- 10%).
void validate_trial(const TrialRecord& trial);

void write_trial_csv(std::ostream& out, const std::vector<ForceFrame>& frames);
void write_trial_csv(const std::filesystem::path& path, const std::vector<ForceFrame>& frames);
/// Throws Error(ParseError) on a malformed header or row, Error(IoError) when
/// the file cannot be opened.
std::vector<ForceFrame> read_trial_csv(std::istream& in);
std::vector<ForceFrame> read_trial_csv(const std::filesystem::path& path);

/// Reads every `subject*_*_*.csv` in `dir`, ordered by (subject, direction,
/// trial). Other files are ignored.
std::vector<TrialRecord> load_trials(const std::filesystem::path& dir);

/// Centered moving average. Near the ends the window shrinks symmetrically,
/// so sample i averages i +- min(window/2, i, n-1-i).
/// Throws EmptySeries on empty input, InvalidArgument for an even window.
std::vector<double> moving_average(std::span<const double> series, std::size_t window);

/// Per-channel moving average of the force readings; timestamps untouched.
std::vector<ForceFrame> filter_frames(const std::vector<ForceFrame>& frames, std::size_t window);

struct PipelineOptions {
  std::size_t window = 9;
  double velocity_threshold_m_per_s = 0.005;
  double yaw_scale = 2.0 / 2.5;
  std::size_t home_samples = 5;
};

/// Filters the forces and maps every frame through `pose_from_forces`.
/// Kinematic failures are rethrown with the frame index in the message.
std::vector<PedalPose> pose_trajectory(const TrialRecord& trial, const DeviceGeometry& geom,
                                       std::size_t window = 9);

/// Reference-point coordinates [P_x, P_y, s P_yaw, P_pitch] in cm for one pose.
/// P_yaw is the signed chord 2 d sin(|yaw|/2), P_pitch = d sin(pitch).
Eigen::Vector4d reference_point(const PedalPose& pose, const DeviceGeometry& geom, double yaw_scale);

struct ReferenceTrack {
  std::vector<double> t_s;
  std::vector<Eigen::Vector4d> p_cm;
  /// Mean pose of the first samples (x, y, yaw, pitch), subtracted before
  /// computing the reference point.
  Eigen::Vector4d home_offset = Eigen::Vector4d::Zero();
};

/// Throws Error(InvalidArgument) if the sequences differ in length or are empty.
ReferenceTrack reference_track(const std::vector<PedalPose>& poses, const std::vector<double>& t_s,
                               const DeviceGeometry& geom, const PipelineOptions& opts = {});

/// Speed of the reference point (m/s) per sample, central differences inside,
/// one-sided at the ends. Needs >= 2 samples.
std::vector<double> resultant_speed(const ReferenceTrack& track);

/// Drops samples slower than the threshold. Throws AllStatic when nothing is
/// left and TooShort for fewer than 2 samples.
ReferenceTrack velocity_filter(const ReferenceTrack& track, double threshold_m_per_s = 0.005);

/// Mean distance (cm) from each sample to its projection on the ray from home
/// along `direction_vector(direction)`. Throws EmptyTrack.
double foot_path_error(const ReferenceTrack& track, Direction direction);

struct SparcOptions {
  double cutoff_hz = 10.0;
  double amplitude_threshold = 0.05;
  int pad_level = 4;
};

/// Spectral arc length of a uniformly sampled speed profile. Throws TooShort
/// for fewer than 32 samples and InvalidArgument for a zero-mean profile.
double sparc(std::span<const double> speed, double sample_rate_hz, const SparcOptions& opts = {});

/// SPARC of the track's resultant speed, sampled at the median interval.
double smoothness_sparc(const ReferenceTrack& track, const SparcOptions& opts = {});

struct TrialMetrics {
  TrialId id;
  double foot_path_error_cm = 0.0;
  double sparc = 0.0;
};

/// Full chain: pose trajectory, reference track, velocity filter, metrics.
TrialMetrics trial_metrics(const TrialRecord& trial, const DeviceGeometry& geom,
                           const PipelineOptions& opts = {}, const SparcOptions& sparc_opts = {});

void write_metrics_csv(std::ostream& out, const std::vector<TrialMetrics>& rows);

}  // namespace footif
