#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "footif/config.hpp"
#include "footif/error.hpp"
#include "footif/statics.hpp"
#include "footif/subject_mapping.hpp"

namespace footif::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

/// Maps a library error onto the exit-code contract.
int exit_code_for(const Error& e);

/// Loads `path` if set, else $FOOTIF_CONFIG if set, else the built-in defaults.
RunConfig resolve_config(const std::optional<std::filesystem::path>& path);

struct SimulateArgs {
  int subjects = 10;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
};
int cmd_simulate(const RunConfig& cfg, const SimulateArgs& args, std::ostream& out, std::ostream& err);

struct CalibrateArgs {
  int subject = 1;
  /// Cohort root (uses subject<id>/set1) or a directory of trial files.
  std::filesystem::path in;
  std::filesystem::path out;
};
int cmd_calibrate(const RunConfig& cfg, const CalibrateArgs& args, std::ostream& out, std::ostream& err);

enum class Baseline { Kinematic, Ica, Both };

struct EvaluateArgs {
  /// A model file, or a directory holding subject<id>.model files.
  std::filesystem::path model;
  /// Cohort root or a directory of trial files.
  std::filesystem::path in;
  /// Dataset to score under a cohort root; unset scores sets 2 and 3.
  std::optional<int> dataset;
  Baseline baseline = Baseline::Both;
  std::filesystem::path report;
};
int cmd_evaluate(const RunConfig& cfg, const EvaluateArgs& args, std::ostream& out, std::ostream& err);

struct EnergyScanArgs {
  std::optional<SpringPlacement> placement;
  GridSpec grid{};
  std::filesystem::path out;
  std::optional<std::filesystem::path> minima;
  std::optional<std::filesystem::path> svg;
};
int cmd_energy_scan(const RunConfig& cfg, const EnergyScanArgs& args, std::ostream& out, std::ostream& err);

struct MetricsArgs {
  std::filesystem::path in;
  std::filesystem::path out;
};
int cmd_metrics(const RunConfig& cfg, const MetricsArgs& args, std::ostream& out, std::ostream& err);

// Evaluation building blocks, shared with the tests.

enum class Mapping { Kinematic, Ica };
std::string_view to_string(Mapping m);

struct TrialScore {
  TrialId id;
  int dataset = 0;
  Mapping mapping = Mapping::Kinematic;
  Accuracy accuracy;
  std::optional<double> foot_path_error_cm;
};

/// Scores one trial. The forces are smoothed with the configured window first.
TrialScore score_trial(const TrialRecord& trial, int dataset, Mapping mapping, const SubjectModel* model,
                       const DeviceGeometry& geom, const RunConfig& cfg);

struct GroupSummary {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

/// Pools per (subject, direction), averages directions per subject, then
/// reports mean and sample deviation across subjects.
GroupSummary cohort_accuracy(const std::vector<TrialScore>& scores, Mapping mapping, bool diagonal);

/// Fits a model from the single-direction trials of one dataset directory.
SubjectModel calibrate_subject(const std::filesystem::path& dataset_dir, int subject, const RunConfig& cfg);

/// Resolves a cohort root or trial directory to the per-subject dataset
/// directories to read. `datasets` is ignored for a plain trial directory.
struct DatasetDir {
  int subject = 0;  // 0 when taken from a plain directory
  int dataset = 0;
  std::filesystem::path path;
};
std::vector<DatasetDir> find_datasets(const std::filesystem::path& in, const std::vector<int>& datasets);

}  // namespace footif::cli
