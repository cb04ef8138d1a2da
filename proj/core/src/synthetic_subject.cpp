#include "footif/synthetic_subject.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/SVD>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "footif/error.hpp"
#include "footif/format.hpp"

namespace footif {
namespace {

double shape_value(ProfileShape shape, double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  if (shape == ProfileShape::MinimumJerk) {
    const double t3 = tau * tau * tau;
    return t3 * (10.0 - 15.0 * tau + 6.0 * tau * tau);
  }
  // Trapezoidal speed with a quarter of the stroke spent accelerating.
  constexpr double a = 0.25;
  constexpr double norm = 2.0 * a * (1.0 - a);
  if (tau < a) return tau * tau / norm;
  if (tau > 1.0 - a) return 1.0 - (1.0 - tau) * (1.0 - tau) / norm;
  return (tau - a / 2.0) / (1.0 - a);
}

// Uniform in [lo, hi) from the top 53 bits.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::string shape_name(ProfileShape s) { return s == ProfileShape::MinimumJerk ? "minimum_jerk" : "trapezoid"; }

ProfileShape parse_shape(const std::string& s) {
  if (s == "minimum_jerk") return ProfileShape::MinimumJerk;
  if (s == "trapezoid") return ProfileShape::Trapezoid;
  throw Error(ErrorCode::ParseError, "unknown profile shape '" + s + "'");
}

template <typename Vec>
std::string join(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

std::vector<double> get_values(const boost::property_tree::ptree& tree, const std::string& key, std::size_t n) {
  const auto text = tree.get_optional<std::string>(key);
  if (!text) throw Error(ErrorCode::ParseError, "manifest is missing '" + key + "'");
  auto v = parse_doubles(*text);
  if (v.size() != n) throw Error(ErrorCode::ParseError, "'" + key + "' needs " + std::to_string(n) + " values");
  return v;
}

double get_double(const boost::property_tree::ptree& tree, const std::string& key) {
  return get_values(tree, key, 1)[0];
}

}  // namespace

ForceFrame forces_for_pose(const PedalPose& pose, const DeviceGeometry& geom, double t_s) {
  if (!workspace_contains(pose, geom)) {
    throw Error(ErrorCode::OutOfWorkspace, "pose lies outside the workspace");
  }
  const GuideLengths lengths = inverse_kinematics(pose, geom);
  ForceFrame frame;
  frame.t_s = t_s;
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    const auto& s = geom.springs().compression[i];
    frame.force_n[static_cast<Eigen::Index>(i)] =
        s.pretension_n + s.stiffness_n_per_cm * (lengths[i] - geom.home_length(i));
  }
  const auto& gp = geom.params();
  const auto& t = gp.springs.torsion;
  frame.force_n[6] = t[0].pretension_n;
  frame.force_n[7] = t[1].pretension_n;
  if (pose.pitch_rad > 0.0) {
    frame.force_n[6] += t[0].stiffness_ncm_per_rad * pose.pitch_rad / gp.sole_lever_cm;
  } else if (pose.pitch_rad < 0.0) {
    frame.force_n[7] += -t[1].stiffness_ncm_per_rad * pose.pitch_rad / gp.heel_lever_cm;
  }
  return frame;
}

ChannelVector full_scale_forces(const DeviceGeometry& geom) {
  ChannelVector fs;
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    const auto& s = geom.springs().compression[i];
    fs[static_cast<Eigen::Index>(i)] = s.stiffness_n_per_cm * s.compression_stroke_cm();
  }
  const auto& gp = geom.params();
  fs[6] = gp.springs.torsion[0].stiffness_ncm_per_rad * gp.limits.pitch_rad / gp.sole_lever_cm;
  fs[7] = gp.springs.torsion[1].stiffness_ncm_per_rad * gp.limits.pitch_rad / gp.heel_lever_cm;
  return fs;
}

double MotionProfile::total_s() const {
  return 2.0 * rest_s + duration_s + hold_s + (return_home ? duration_s : 0.0);
}

std::size_t MotionProfile::frame_count() const {
  return static_cast<std::size_t>(std::llround(total_s() * sample_rate_hz));
}

double MotionProfile::progress(double t) const {
  double u = t - rest_s;
  if (u < 0.0) return 0.0;
  if (u < duration_s) return shape_value(shape, u / duration_s);
  u -= duration_s;
  if (u < hold_s) return 1.0;
  u -= hold_s;
  if (!return_home) return 1.0;
  if (u < duration_s) return 1.0 - shape_value(shape, u / duration_s);
  return 0.0;
}

void validate_profile(const MotionProfile& p) {
  if (!(p.duration_s > 0.0) || p.rest_s < 0.0 || p.hold_s < 0.0 || !(p.sample_rate_hz > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "profile durations must be non-negative and the stroke positive");
  }
}

void validate_subject(const SyntheticSubject& subject) {
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(subject.distortion);
  const auto sv = svd.singularValues();
  if (!(sv[3] > 0.0) || sv[0] / sv[3] >= 100.0) {
    throw Error(ErrorCode::InvalidArgument, "distortion condition number must stay below 100");
  }
  if (!(subject.noise_sigma >= 0.0 && subject.noise_sigma <= 0.2)) {
    throw Error(ErrorCode::InvalidArgument, "noise_sigma must lie in [0, 0.2]");
  }
  if ((subject.channel_gain.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "channel gains must be positive");
  }
}

PedalPose command_to_pose(const Eigen::Vector4d& c, const DeviceGeometry& geom) {
  const auto& lim = geom.limits();
  return {c[0] * lim.translation_cm, c[1] * lim.translation_cm, c[2] * lim.yaw_rad, c[3] * lim.pitch_rad};
}

std::vector<PedalPose> intended_poses(const SyntheticSubject& subject, Direction direction,
                                      const MotionProfile& profile, const DeviceGeometry& geom, bool* clipped) {
  validate_profile(profile);
  // Centre-out ray to the boundary of the normalized workspace box, so
  // diagonals end at a corner.
  const Eigen::Vector4d u = direction_vector(direction);
  const Eigen::Vector4d executed = subject.distortion * (u / u.cwiseAbs().maxCoeff());
  const std::size_t n = profile.frame_count();
  std::vector<PedalPose> poses;
  poses.reserve(n);
  bool hit = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / profile.sample_rate_hz;
    const PedalPose raw = command_to_pose(executed * profile.progress(t), geom);
    PedalPose pose = raw;
    if (!workspace_contains(raw, geom)) {
      pose = clamp_to_workspace(raw, geom);
      hit = true;
    }
    poses.push_back(pose);
  }
  if (clipped) *clipped = hit;
  return poses;
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

GeneratedTrial generate_trial(const SyntheticSubject& subject, Direction direction, const MotionProfile& profile,
                              const DeviceGeometry& geom, int dataset, int trial) {
  validate_subject(subject);
  GeneratedTrial out;
  const auto poses = intended_poses(subject, direction, profile, geom, &out.clipped);

  const std::uint64_t key = (static_cast<std::uint64_t>(dataset) << 40) ^
                            (static_cast<std::uint64_t>(direction) << 20) ^ static_cast<std::uint64_t>(trial);
  std::mt19937_64 rng(mix_seed(subject.seed ^ mix_seed(key)));
  std::normal_distribution<double> normal(0.0, 1.0);
  const ChannelVector f0 = geom.pretension();
  const ChannelVector sigma = subject.noise_sigma * full_scale_forces(geom);

  out.record.id = {subject.id, direction, trial};
  out.record.frames.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const double t = static_cast<double>(i) / profile.sample_rate_hz;
    ForceFrame f = forces_for_pose(poses[i], geom, t);
    f.force_n = f0 + subject.channel_gain.cwiseProduct(f.force_n - f0);
    for (Eigen::Index c = 0; c < 8; ++c) {
      const double noise = normal(rng);
      f.force_n[c] = std::max(0.0, f.force_n[c] + sigma[c] * noise);
    }
    out.record.frames.push_back(f);
  }
  return out;
}

Eigen::Matrix4d make_distortion(double rotation_deg, double skew_x_yaw, double skew_y_pitch,
                                const Eigen::Vector4d& gains) {
  const double a = deg_to_rad(rotation_deg);
  Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
  r(0, 0) = std::cos(a);
  r(0, 1) = -std::sin(a);
  r(1, 0) = std::sin(a);
  r(1, 1) = std::cos(a);
  Eigen::Matrix4d s = Eigen::Matrix4d::Identity();
  s(2, 0) = skew_x_yaw;
  s(3, 1) = skew_y_pitch;
  return gains.asDiagonal() * s * r;
}

Cohort make_cohort(const CohortSpec& spec) {
  if (spec.n_subjects < 1) throw Error(ErrorCode::InvalidArgument, "cohort needs at least one subject");
  if (spec.trials_per_direction < 1) throw Error(ErrorCode::InvalidArgument, "trials_per_direction must be >= 1");
  validate_profile(spec.profile);
  Cohort cohort;
  cohort.spec = spec;
  for (int id = 1; id <= spec.n_subjects; ++id) {
    std::mt19937_64 rng(mix_seed(spec.seed ^ mix_seed(static_cast<std::uint64_t>(id))));
    const double sign = (rng() & 1U) ? 1.0 : -1.0;
    const double rot = sign * uniform(rng, spec.rotation_min_deg, spec.rotation_max_deg);
    const double skew_yaw = uniform(rng, -spec.skew_max, spec.skew_max);
    const double skew_pitch = uniform(rng, -spec.skew_max, spec.skew_max);
    Eigen::Vector4d gains;
    for (int i = 0; i < 4; ++i) gains[i] = uniform(rng, spec.gain_min, spec.gain_max);
    SyntheticSubject s;
    s.id = id;
    s.distortion = make_distortion(rot, skew_yaw, skew_pitch, gains);
    for (int c = 0; c < 8; ++c) s.channel_gain[c] = uniform(rng, spec.channel_gain_min, spec.channel_gain_max);
    s.noise_sigma = spec.noise_sigma;
    s.seed = rng();
    validate_subject(s);
    cohort.subjects.push_back(s);
  }
  return cohort;
}

std::filesystem::path dataset_dir(const std::filesystem::path& dir, int subject, int dataset) {
  return dir / ("subject" + std::to_string(subject)) / ("set" + std::to_string(dataset));
}

std::size_t write_cohort(const Cohort& cohort, const DeviceGeometry& geom, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "manifest.txt", std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / "manifest.txt").string());
    write_manifest(out, cohort);
  }
  std::size_t written = 0;
  for (const auto& subject : cohort.subjects) {
    for (int dataset = 1; dataset <= 3; ++dataset) {
      const auto sub = dataset_dir(dir, subject.id, dataset);
      std::filesystem::create_directories(sub, ec);
      if (ec) throw Error(ErrorCode::IoError, "cannot create " + sub.string() + ": " + ec.message());
      // Trial numbers continue across sets 1 and 2 so file names stay unique per subject.
      const int first = dataset == 2 ? cohort.spec.trials_per_direction + 1 : 1;
      auto emit = [&](Direction d) {
        for (int trial = first; trial < first + cohort.spec.trials_per_direction; ++trial) {
          const auto gen = generate_trial(subject, d, cohort.spec.profile, geom, dataset, trial);
          write_trial_csv(sub / trial_filename(gen.record.id), gen.record.frames);
          ++written;
        }
      };
      if (dataset < 3) {
        for (Direction d : kSingleDirections) emit(d);
      } else {
        for (Direction d : kDiagonalDirections) emit(d);
      }
    }
  }
  return written;
}

void write_manifest(std::ostream& out, const Cohort& cohort) {
  const auto& s = cohort.spec;
  const auto& p = s.profile;
  out << "# footif synthetic cohort\n";
  out << "[cohort]\n";
  out << "format_version = 1\n";
  out << "subjects = " << s.n_subjects << '\n';
  out << "seed = " << s.seed << '\n';
  out << "rotation_deg = " << format_double(s.rotation_min_deg) << ' ' << format_double(s.rotation_max_deg) << '\n';
  out << "skew_max = " << format_double(s.skew_max) << '\n';
  out << "gain = " << format_double(s.gain_min) << ' ' << format_double(s.gain_max) << '\n';
  out << "channel_gain = " << format_double(s.channel_gain_min) << ' ' << format_double(s.channel_gain_max) << '\n';
  out << "noise_sigma = " << format_double(s.noise_sigma) << '\n';
  out << "trials_per_direction = " << s.trials_per_direction << '\n';
  out << "[profile]\n";
  out << "shape = " << shape_name(p.shape) << '\n';
  out << "rest_s = " << format_double(p.rest_s) << '\n';
  out << "duration_s = " << format_double(p.duration_s) << '\n';
  out << "hold_s = " << format_double(p.hold_s) << '\n';
  out << "return_home = " << (p.return_home ? 1 : 0) << '\n';
  out << "sample_rate_hz = " << format_double(p.sample_rate_hz) << '\n';
  for (const auto& subj : cohort.subjects) {
    out << "[subject" << subj.id << "]\n";
    out << "seed = " << subj.seed << '\n';
    out << "noise_sigma = " << format_double(subj.noise_sigma) << '\n';
    const Eigen::Matrix<double, 16, 1> flat = Eigen::Map<const Eigen::Matrix<double, 16, 1>>(
        Eigen::Matrix<double, 4, 4, Eigen::RowMajor>(subj.distortion).data());
    out << "distortion = " << join(flat) << '\n';
    out << "channel_gain = " << join(subj.channel_gain) << '\n';
  }
}

Cohort read_manifest(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  Cohort c;
  try {
    if (tree.get<int>("cohort.format_version") != 1) {
      throw Error(ErrorCode::ParseError, "unsupported manifest version");
    }
    auto& s = c.spec;
    s.n_subjects = tree.get<int>("cohort.subjects");
    s.seed = tree.get<std::uint64_t>("cohort.seed");
    auto rot = get_values(tree, "cohort.rotation_deg", 2);
    s.rotation_min_deg = rot[0];
    s.rotation_max_deg = rot[1];
    s.skew_max = get_double(tree, "cohort.skew_max");
    auto gain = get_values(tree, "cohort.gain", 2);
    s.gain_min = gain[0];
    s.gain_max = gain[1];
    auto cg = get_values(tree, "cohort.channel_gain", 2);
    s.channel_gain_min = cg[0];
    s.channel_gain_max = cg[1];
    s.noise_sigma = get_double(tree, "cohort.noise_sigma");
    s.trials_per_direction = tree.get<int>("cohort.trials_per_direction");
    s.profile.shape = parse_shape(tree.get<std::string>("profile.shape"));
    s.profile.rest_s = get_double(tree, "profile.rest_s");
    s.profile.duration_s = get_double(tree, "profile.duration_s");
    s.profile.hold_s = get_double(tree, "profile.hold_s");
    s.profile.return_home = tree.get<int>("profile.return_home") != 0;
    s.profile.sample_rate_hz = get_double(tree, "profile.sample_rate_hz");
    for (int id = 1; id <= s.n_subjects; ++id) {
      const std::string sec = "subject" + std::to_string(id) + ".";
      SyntheticSubject subj;
      subj.id = id;
      subj.seed = tree.get<std::uint64_t>(sec + "seed");
      subj.noise_sigma = get_double(tree, sec + "noise_sigma");
      const auto d = get_values(tree, sec + "distortion", 16);
      for (int r = 0; r < 4; ++r) {
        for (int col = 0; col < 4; ++col) subj.distortion(r, col) = d[static_cast<std::size_t>(r * 4 + col)];
      }
      const auto g = get_values(tree, sec + "channel_gain", 8);
      for (int i = 0; i < 8; ++i) subj.channel_gain[i] = g[static_cast<std::size_t>(i)];
      c.subjects.push_back(subj);
    }
  } catch (const pt::ptree_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return c;
}

Cohort read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_manifest(in);
}

}  // namespace footif
