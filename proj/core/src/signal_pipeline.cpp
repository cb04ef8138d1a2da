#include "footif/signal_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>
#include <tuple>

#include <unsupported/Eigen/FFT>

#include "footif/error.hpp"
#include "footif/format.hpp"

namespace footif {
namespace {

constexpr std::string_view kTrialHeader = "t_s,f1_n,f2_n,f3_n,f4_n,f5_n,f6_n,f7_n,f8_n";

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string trial_filename(const TrialId& id) {
  return "subject" + std::to_string(id.subject) + "_" + std::string(to_string(id.direction)) + "_" +
         std::to_string(id.trial) + ".csv";
}

std::optional<TrialId> parse_trial_filename(const std::string& filename) {
  static const std::regex pattern(R"(subject(\d+)_([A-Z]+)_(\d+)\.csv)");
  std::smatch m;
  if (!std::regex_match(filename, m, pattern)) return std::nullopt;
  const auto dir = parse_direction(m[2].str());
  if (!dir) return std::nullopt;
  return TrialId{std::stoi(m[1].str()), *dir, std::stoi(m[3].str())};
}

void validate_trial(const TrialRecord& trial) {
  if (trial.frames.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "trial needs at least 2 frames");
  }
  validate_frames(trial.frames);
  for (std::size_t i = 1; i < trial.frames.size(); ++i) {
    const double dt = trial.frames[i].t_s - trial.frames[i - 1].t_s;
    if (dt < 0.018 || dt > 0.022) {
      throw Error(ErrorCode::InvalidArgument,
                  "sample interval at frame " + std::to_string(i) + " is not 0.02 s +- 10%");
    }
  }
}

void write_trial_csv(std::ostream& out, const std::vector<ForceFrame>& frames) {
  out << kTrialHeader << '\n';
  for (const auto& f : frames) {
    out << format_double(f.t_s);
    for (Eigen::Index c = 0; c < f.force_n.size(); ++c) out << ',' << format_double(f.force_n[c]);
    out << '\n';
  }
}

void write_trial_csv(const std::filesystem::path& path, const std::vector<ForceFrame>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_trial_csv(out, frames);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<ForceFrame> read_trial_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kTrialHeader) {
    throw Error(ErrorCode::ParseError, "expected header '" + std::string(kTrialHeader) + "'");
  }
  std::vector<ForceFrame> frames;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) values.push_back(parse_double(cell));
    if (values.size() != 9) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + " has " +
                                             std::to_string(values.size()) + " fields, expected 9");
    }
    ForceFrame f;
    f.t_s = values[0];
    for (int c = 0; c < 8; ++c) f.force_n[c] = values[static_cast<std::size_t>(c) + 1];
    frames.push_back(f);
  }
  return frames;
}

std::vector<ForceFrame> read_trial_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return read_trial_csv(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<TrialRecord> load_trials(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
  }
  std::vector<std::pair<TrialId, std::filesystem::path>> found;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (auto id = parse_trial_filename(entry.path().filename().string())) {
      found.emplace_back(*id, entry.path());
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return std::tuple(a.first.subject, static_cast<int>(a.first.direction), a.first.trial) <
           std::tuple(b.first.subject, static_cast<int>(b.first.direction), b.first.trial);
  });
  std::vector<TrialRecord> trials;
  trials.reserve(found.size());
  for (const auto& [id, path] : found) trials.push_back({id, read_trial_csv(path)});
  return trials;
}

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "moving average of an empty series");
  if (window == 0 || window % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "moving-average window must be odd and >= 1");
  }
  const std::size_t n = series.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({window / 2, i, n - 1 - i});
    double sum = 0.0;
    for (std::size_t j = i - h; j <= i + h; ++j) sum += series[j];
    out[i] = sum / static_cast<double>(2 * h + 1);
  }
  return out;
}

std::vector<ForceFrame> filter_frames(const std::vector<ForceFrame>& frames, std::size_t window) {
  std::vector<ForceFrame> out = frames;
  if (frames.empty()) return out;
  std::vector<double> channel(frames.size());
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(kChannels); ++c) {
    for (std::size_t i = 0; i < frames.size(); ++i) channel[i] = frames[i].force_n[c];
    const auto smooth = moving_average(channel, window);
    for (std::size_t i = 0; i < frames.size(); ++i) out[i].force_n[c] = smooth[i];
  }
  return out;
}

std::vector<PedalPose> pose_trajectory(const TrialRecord& trial, const DeviceGeometry& geom,
                                       std::size_t window) {
  const auto filtered = filter_frames(trial.frames, window);
  std::vector<PedalPose> poses;
  poses.reserve(filtered.size());
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    try {
      poses.push_back(pose_from_forces(filtered[i], geom));
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(i) + ": " + e.what());
    }
  }
  return poses;
}

Eigen::Vector4d reference_point(const PedalPose& pose, const DeviceGeometry& geom, double yaw_scale) {
  const double d = geom.params().reference_offset_cm;
  const double sd = std::sin(pose.yaw_rad), cd = std::cos(pose.yaw_rad);
  const double chord = std::sqrt(d * sd * d * sd + (d - d * cd) * (d - d * cd));
  const double p_yaw = pose.yaw_rad > 0 ? chord : (pose.yaw_rad < 0 ? -chord : 0.0);
  return {pose.x_cm, pose.y_cm, yaw_scale * p_yaw, d * std::sin(pose.pitch_rad)};
}

ReferenceTrack reference_track(const std::vector<PedalPose>& poses, const std::vector<double>& t_s,
                               const DeviceGeometry& geom, const PipelineOptions& opts) {
  if (poses.empty() || poses.size() != t_s.size()) {
    throw Error(ErrorCode::InvalidArgument, "poses and timestamps must be non-empty and equally long");
  }
  ReferenceTrack track;
  const std::size_t nh = std::clamp<std::size_t>(opts.home_samples, 1, poses.size());
  for (std::size_t i = 0; i < nh; ++i) track.home_offset += poses[i].as_vector();
  track.home_offset /= static_cast<double>(nh);
  track.t_s = t_s;
  track.p_cm.reserve(poses.size());
  for (const auto& pose : poses) {
    const PedalPose rel = PedalPose::from_vector(pose.as_vector() - track.home_offset);
    track.p_cm.push_back(reference_point(rel, geom, opts.yaw_scale));
  }
  return track;
}

std::vector<double> resultant_speed(const ReferenceTrack& track) {
  const std::size_t n = track.p_cm.size();
  if (n < 2) throw Error(ErrorCode::TooShort, "speed needs at least 2 samples");
  std::vector<double> speed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    const double dt = track.t_s[hi] - track.t_s[lo];
    speed[i] = (track.p_cm[hi] - track.p_cm[lo]).norm() / dt / 100.0;
  }
  return speed;
}

ReferenceTrack velocity_filter(const ReferenceTrack& track, double threshold_m_per_s) {
  const auto speed = resultant_speed(track);
  ReferenceTrack out;
  out.home_offset = track.home_offset;
  for (std::size_t i = 0; i < speed.size(); ++i) {
    if (speed[i] >= threshold_m_per_s) {
      out.t_s.push_back(track.t_s[i]);
      out.p_cm.push_back(track.p_cm[i]);
    }
  }
  if (out.p_cm.empty()) throw Error(ErrorCode::AllStatic, "no sample exceeds the velocity threshold");
  return out;
}

double foot_path_error(const ReferenceTrack& track, Direction direction) {
  if (track.p_cm.empty()) throw Error(ErrorCode::EmptyTrack, "foot-path error of an empty track");
  const Eigen::Vector4d u = direction_vector(direction);
  double sum = 0.0;
  for (const auto& p : track.p_cm) {
    const double along = std::max(0.0, p.dot(u));
    sum += (p - along * u).norm();
  }
  return sum / static_cast<double>(track.p_cm.size());
}

double sparc(std::span<const double> speed, double sample_rate_hz, const SparcOptions& opts) {
  if (speed.size() < 32) throw Error(ErrorCode::TooShort, "SPARC needs at least 32 samples");
  const auto n = speed.size();
  const int bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) + opts.pad_level;
  const std::size_t nfft = std::size_t{1} << bits;

  std::vector<double> padded(nfft, 0.0);
  std::copy(speed.begin(), speed.end(), padded.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);

  const double dc = std::abs(spectrum[0]);
  if (dc == 0.0) throw Error(ErrorCode::InvalidArgument, "SPARC of a zero speed profile");
  const double df = sample_rate_hz / static_cast<double>(nfft);
  std::vector<double> freq, mag;
  for (std::size_t k = 0; k < nfft && static_cast<double>(k) * df <= opts.cutoff_hz; ++k) {
    freq.push_back(static_cast<double>(k) * df);
    mag.push_back(std::abs(spectrum[k]) / dc);
  }

  std::size_t first = mag.size(), last = 0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    if (mag[k] >= opts.amplitude_threshold) {
      first = std::min(first, k);
      last = k;
    }
  }
  if (first >= last) return 0.0;
  const double span = freq[last] - freq[first];
  double length = 0.0;
  for (std::size_t k = first + 1; k <= last; ++k) {
    const double a = (freq[k] - freq[k - 1]) / span;
    const double b = mag[k] - mag[k - 1];
    length += std::sqrt(a * a + b * b);
  }
  return -length;
}

double smoothness_sparc(const ReferenceTrack& track, const SparcOptions& opts) {
  if (track.p_cm.size() < 32) throw Error(ErrorCode::TooShort, "SPARC needs at least 32 samples");
  const auto speed = resultant_speed(track);
  std::vector<double> dts;
  dts.reserve(track.t_s.size() - 1);
  for (std::size_t i = 1; i < track.t_s.size(); ++i) dts.push_back(track.t_s[i] - track.t_s[i - 1]);
  std::nth_element(dts.begin(), dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2), dts.end());
  const double dt = dts[dts.size() / 2];
  return sparc(speed, 1.0 / dt, opts);
}

TrialMetrics trial_metrics(const TrialRecord& trial, const DeviceGeometry& geom,
                           const PipelineOptions& opts, const SparcOptions& sparc_opts) {
  const auto poses = pose_trajectory(trial, geom, opts.window);
  std::vector<double> t;
  t.reserve(trial.frames.size());
  for (const auto& f : trial.frames) t.push_back(f.t_s);
  const auto track = velocity_filter(reference_track(poses, t, geom, opts), opts.velocity_threshold_m_per_s);
  TrialMetrics m;
  m.id = trial.id;
  m.foot_path_error_cm = foot_path_error(track, trial.id.direction);
  m.sparc = smoothness_sparc(track, sparc_opts);
  return m;
}

void write_metrics_csv(std::ostream& out, const std::vector<TrialMetrics>& rows) {
  out << "subject,direction,trial,foot_path_error_cm,sparc\n";
  for (const auto& r : rows) {
    out << r.id.subject << ',' << to_string(r.id.direction) << ',' << r.id.trial << ','
        << format_double(r.foot_path_error_cm) << ',' << format_double(r.sparc) << '\n';
  }
}

}  // namespace footif
