#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "footif/device_model.hpp"
#include "footif/direction.hpp"
#include "footif/signal_pipeline.hpp"

namespace footif {

inline constexpr int kModelFormatVersion = 1;

using MappingMatrix = Eigen::Matrix<double, 4, 8>;

/// Load-cell readings minus the spring pretensions.
ChannelVector delta_forces(const ForceFrame& frame, const DeviceGeometry& geom);

struct ZScore {
  ChannelVector mean = ChannelVector::Zero();
  ChannelVector sigma = ChannelVector::Ones();
};

/// Channel means and sample standard deviations (n - 1). Throws
/// Error(TooShort) for fewer than 2 samples and Error(ConstantChannel) when a
/// deviation is below 1e-9 N.
ZScore zscore_stats(std::span<const ChannelVector> samples);
ChannelVector normalize(const ChannelVector& delta, const ZScore& stats);
ChannelVector denormalize(const ChannelVector& normalized, const ZScore& stats);

struct DofRange {
  double min = -1.0;
  double max = 1.0;
};

/// Values inside [lo, hi] (inclusive) map to exactly zero.
struct ZeroBand {
  double lo = 0.0;
  double hi = 0.0;
};

/// Dead-zone fractions of the output range for x, y, yaw, pitch.
inline constexpr std::array<double, 4> kDefaultBandFractions = {0.3, 0.3, 0.4, 0.4};

/// [fraction * min, fraction * max]. Throws Error(DegenerateRange) unless
/// min < 0 < max.
ZeroBand zero_band_from_range(const DofRange& range, double fraction);
std::array<ZeroBand, 4> zero_band_from_model(const std::array<DofRange, 4>& ranges,
                                             const std::array<double, 4>& fractions = kDefaultBandFractions);

/// Range and dead zone for each output.
struct OutputScaling {
  std::array<DofRange, 4> range{};
  std::array<ZeroBand, 4> band{};
};

struct CommandVector {
  Eigen::Vector4d value = Eigen::Vector4d::Zero();     // in [-1, 1], dead zone applied
  Eigen::Vector4d unbanded = Eigen::Vector4d::Zero();  // in [-1, 1], no dead zone
};

/// Positive values divide by max, negative by |min|, clamped to [-1, 1].
CommandVector scale_output(const Eigen::Vector4d& raw, const OutputScaling& scaling);

/// Workspace limits in (cm, cm, deg, deg) with the dead zone derived from them.
OutputScaling kinematic_scaling(const DeviceGeometry& geom,
                                const std::array<double, 4>& fractions = kDefaultBandFractions);

/// Baseline mapping: pose_from_forces, angles in degrees, scaled by the
/// workspace limits.
CommandVector kinematic_command(const ForceFrame& frame, const DeviceGeometry& geom,
                                const OutputScaling& scaling);

/// The four single-axis direction pairs in output order, positive first:
/// (R, L), (F, B), (LT, RT), (TD, TU).
std::array<std::array<Direction, 2>, 4> axis_pairs();

/// Delta forces of the single-direction trials grouped by axis pair, with
/// +1/-1 labels for the positive/negative direction of each sample.
struct CalibrationSet {
  std::array<std::vector<ChannelVector>, 4> deltas;
  std::array<std::vector<double>, 4> labels;
};

/// Filters each trial with a centered moving average of `window` samples
/// first. Throws Error(InvalidArgument) naming any missing direction; diagonal
/// trials are ignored.
CalibrationSet build_calibration_set(const std::vector<TrialRecord>& trials, const DeviceGeometry& geom,
                                     std::size_t window = 9);

struct AlignResult {
  Eigen::VectorXd component;
  Eigen::Index index = 0;
  /// Per candidate, before any sign flip.
  std::vector<double> correlations;
  bool ambiguous = false;
};

/// Picks the row of `candidates` whose activation on `data` (one observation
/// per row) has the largest |Pearson correlation| with `labels`, and flips it
/// so the correlation is positive. Ties within 0.05 are flagged ambiguous and
/// the first is taken.
AlignResult align_component(const Eigen::MatrixXd& candidates, const Eigen::MatrixXd& data,
                            std::span<const double> labels);

struct MappingOptions {
  double tolerance = 1e-6;
  int max_iterations = 500;
  std::uint64_t seed = 42;
  std::size_t window = 9;
  std::array<double, 4> band_fractions = kDefaultBandFractions;
};

struct DofDiagnostics {
  int iterations = 0;
  std::vector<double> correlations;
  bool ambiguous = false;
};

struct SubjectModel {
  int subject_id = 0;
  MappingMatrix t = MappingMatrix::Zero();
  ZScore stats;
  /// T applied to the normalized home frame; subtracted from every output.
  Eigen::Vector4d home_offset = Eigen::Vector4d::Zero();
  OutputScaling scaling;
  MappingOptions options;
  std::array<DofDiagnostics, 4> diagnostics{};
};

/// Two FastICA components per axis pair on the z-scored calibration data,
/// one kept per output via `align_component`. Throws Error(InvalidArgument)
/// for fewer than 200 samples in a pair; FastICA errors propagate.
SubjectModel fit_ica(const CalibrationSet& calib, const MappingOptions& opts = {}, int subject_id = 0);

/// Raw T f_n minus the home offset.
Eigen::Vector4d model_output(const SubjectModel& model, const ForceFrame& frame, const DeviceGeometry& geom);
CommandVector predict_command(const SubjectModel& model, const ForceFrame& frame, const DeviceGeometry& geom);

void write_model(std::ostream& out, const SubjectModel& model);
void write_model(const std::filesystem::path& path, const SubjectModel& model);
/// Throws Error(ParseError) on a malformed or wrong-version document.
SubjectModel read_model(std::istream& in);
SubjectModel read_model(const std::filesystem::path& path);

struct Accuracy {
  std::size_t correct = 0;
  std::size_t counted = 0;
  bool all_zero = false;
  [[nodiscard]] double ratio() const {
    return counted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(counted);
  }
};

/// Rotates the plane of the diagonal's two axes anticlockwise by 45 degrees
/// (first axis in x, y, pitch order first), so the target lands on one signed
/// axis, then reapplies the dead zone in normalized units.
struct DiagonalFrame {
  std::vector<CommandVector> commands;
  SignedAxis target;
};
DiagonalFrame diagonal_transform(std::span<const CommandVector> commands, Direction diagonal,
                                 const std::array<double, 4>& fractions = kDefaultBandFractions);

/// A sample counts when any compared component is nonzero; it is correct when
/// the target component is the only nonzero one and has the right sign. Yaw is
/// left out for diagonals.
Accuracy direction_accuracy(std::span<const CommandVector> commands, Direction target,
                            const std::array<double, 4>& fractions = kDefaultBandFractions);

}  // namespace footif
