#include "footif/subject_mapping.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "footif/error.hpp"
#include "footif/fastica.hpp"
#include "footif/format.hpp"

namespace footif {
namespace {

constexpr std::array<const char*, 4> kDofNames = {"x", "y", "yaw", "pitch"};

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double den = ca.norm() * cb.norm();
  return den == 0.0 ? 0.0 : ca.dot(cb) / den;
}

Eigen::MatrixXd stack_normalized(const std::vector<ChannelVector>& deltas, const ZScore& stats) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(deltas.size()), 8);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = normalize(deltas[i], stats).transpose();
  }
  return m;
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

template <int N>
Eigen::Matrix<double, N, 1> parse_fixed(const boost::property_tree::ptree& tree, const std::string& key) {
  const auto text = tree.get_optional<std::string>(key);
  if (!text) throw Error(ErrorCode::ParseError, "model is missing '" + key + "'");
  const auto values = parse_doubles(*text);
  if (values.size() != static_cast<std::size_t>(N)) {
    throw Error(ErrorCode::ParseError, "'" + key + "' needs " + std::to_string(N) + " values");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = values[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

ChannelVector delta_forces(const ForceFrame& frame, const DeviceGeometry& geom) {
  return frame.force_n - geom.pretension();
}

ZScore zscore_stats(std::span<const ChannelVector> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::TooShort, "z-score statistics need at least 2 samples");
  ZScore z;
  z.mean.setZero();
  for (const auto& s : samples) z.mean += s;
  z.mean /= static_cast<double>(samples.size());
  ChannelVector ss = ChannelVector::Zero();
  for (const auto& s : samples) ss += (s - z.mean).array().square().matrix();
  z.sigma = (ss / static_cast<double>(samples.size() - 1)).cwiseSqrt();
  for (Eigen::Index c = 0; c < 8; ++c) {
    if (z.sigma[c] < 1e-9) {
      throw Error(ErrorCode::ConstantChannel, "load cell " + std::to_string(c + 1) + " is constant");
    }
  }
  return z;
}

ChannelVector normalize(const ChannelVector& delta, const ZScore& stats) {
  return ((delta - stats.mean).array() / stats.sigma.array()).matrix();
}

ChannelVector denormalize(const ChannelVector& normalized, const ZScore& stats) {
  return (normalized.array() * stats.sigma.array()).matrix() + stats.mean;
}

ZeroBand zero_band_from_range(const DofRange& range, double fraction) {
  if (!(range.min < 0.0 && range.max > 0.0)) {
    throw Error(ErrorCode::DegenerateRange, "output range must straddle zero, got [" +
                                                format_double(range.min) + ", " + format_double(range.max) + "]");
  }
  return {fraction * range.min, fraction * range.max};
}

std::array<ZeroBand, 4> zero_band_from_model(const std::array<DofRange, 4>& ranges,
                                             const std::array<double, 4>& fractions) {
  std::array<ZeroBand, 4> bands;
  for (std::size_t d = 0; d < 4; ++d) bands[d] = zero_band_from_range(ranges[d], fractions[d]);
  return bands;
}

CommandVector scale_output(const Eigen::Vector4d& raw, const OutputScaling& scaling) {
  CommandVector cmd;
  for (std::size_t d = 0; d < 4; ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    const double v = raw[i];
    double s = 0.0;
    if (v > 0.0) s = std::min(v / scaling.range[d].max, 1.0);
    if (v < 0.0) s = std::max(v / -scaling.range[d].min, -1.0);
    cmd.unbanded[i] = s;
    const bool dead = v >= scaling.band[d].lo && v <= scaling.band[d].hi;
    cmd.value[i] = dead ? 0.0 : s;
  }
  return cmd;
}

OutputScaling kinematic_scaling(const DeviceGeometry& geom, const std::array<double, 4>& fractions) {
  const auto& lim = geom.limits();
  OutputScaling s;
  s.range = {DofRange{-lim.translation_cm, lim.translation_cm}, DofRange{-lim.translation_cm, lim.translation_cm},
             DofRange{-rad_to_deg(lim.yaw_rad), rad_to_deg(lim.yaw_rad)},
             DofRange{-rad_to_deg(lim.pitch_rad), rad_to_deg(lim.pitch_rad)}};
  s.band = zero_band_from_model(s.range, fractions);
  return s;
}

CommandVector kinematic_command(const ForceFrame& frame, const DeviceGeometry& geom, const OutputScaling& scaling) {
  const PedalPose pose = pose_from_forces(frame, geom);
  return scale_output({pose.x_cm, pose.y_cm, rad_to_deg(pose.yaw_rad), rad_to_deg(pose.pitch_rad)}, scaling);
}

std::array<std::array<Direction, 2>, 4> axis_pairs() {
  return {{{Direction::R, Direction::L},
           {Direction::F, Direction::B},
           {Direction::LT, Direction::RT},
           {Direction::TD, Direction::TU}}};
}

CalibrationSet build_calibration_set(const std::vector<TrialRecord>& trials, const DeviceGeometry& geom,
                                     std::size_t window) {
  CalibrationSet set;
  const auto pairs = axis_pairs();
  std::string missing;
  for (std::size_t d = 0; d < 4; ++d) {
    for (std::size_t side = 0; side < 2; ++side) {
      const Direction dir = pairs[d][side];
      bool any = false;
      for (const auto& trial : trials) {
        if (trial.id.direction != dir) continue;
        any = true;
        for (const auto& f : filter_frames(trial.frames, window)) {
          set.deltas[d].push_back(delta_forces(f, geom));
          set.labels[d].push_back(side == 0 ? 1.0 : -1.0);
        }
      }
      if (!any) missing += (missing.empty() ? "" : ", ") + std::string(to_string(dir));
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::InvalidArgument, "calibration trials missing for directions: " + missing);
  }
  return set;
}

AlignResult align_component(const Eigen::MatrixXd& candidates, const Eigen::MatrixXd& data,
                            std::span<const double> labels) {
  if (candidates.rows() < 1 || candidates.cols() != data.cols() ||
      static_cast<std::size_t>(data.rows()) != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "align_component: inconsistent shapes");
  }
  const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(labels.data(), data.rows());
  AlignResult res;
  double best = -1.0, second = -1.0;
  for (Eigen::Index r = 0; r < candidates.rows(); ++r) {
    const double c = pearson(data * candidates.row(r).transpose(), target);
    res.correlations.push_back(c);
    if (std::abs(c) > best) {
      second = best;
      best = std::abs(c);
      res.index = r;
    } else if (std::abs(c) > second) {
      second = std::abs(c);
    }
  }
  res.ambiguous = candidates.rows() > 1 && best - second < 0.05;
  const double sign = res.correlations[static_cast<std::size_t>(res.index)] < 0.0 ? -1.0 : 1.0;
  res.component = sign * candidates.row(res.index).transpose();
  return res;
}

SubjectModel fit_ica(const CalibrationSet& calib, const MappingOptions& opts, int subject_id) {
  SubjectModel model;
  model.subject_id = subject_id;
  model.options = opts;

  std::vector<ChannelVector> all;
  for (const auto& pair : calib.deltas) all.insert(all.end(), pair.begin(), pair.end());
  model.stats = zscore_stats(all);
  const ChannelVector home = normalize(ChannelVector::Zero(), model.stats);

  for (std::size_t d = 0; d < 4; ++d) {
    if (calib.deltas[d].size() < 200) {
      throw Error(ErrorCode::InvalidArgument, std::string("axis pair ") + kDofNames[d] +
                                                  " has fewer than 200 calibration samples");
    }
    const Eigen::MatrixXd data = stack_normalized(calib.deltas[d], model.stats);
    FastIcaOptions ica;
    ica.n_components = 2;
    ica.tolerance = opts.tolerance;
    ica.max_iterations = opts.max_iterations;
    ica.seed = opts.seed;
    FastIcaResult fit;
    try {
      fit = fast_ica(data, ica);
    } catch (const Error& e) {
      throw Error(e.code(), std::string("axis pair ") + kDofNames[d] + ": " + e.what());
    }
    const AlignResult aligned = align_component(fit.components(), data, calib.labels[d]);
    model.t.row(static_cast<Eigen::Index>(d)) = aligned.component.transpose();
    model.diagnostics[d] = {fit.iterations, aligned.correlations, aligned.ambiguous};

    const double offset = aligned.component.dot(home);
    model.home_offset[static_cast<Eigen::Index>(d)] = offset;
    const Eigen::VectorXd out = (data * aligned.component).array() - offset;
    model.scaling.range[d] = {out.minCoeff(), out.maxCoeff()};
  }
  model.scaling.band = zero_band_from_model(model.scaling.range, opts.band_fractions);
  return model;
}

Eigen::Vector4d model_output(const SubjectModel& model, const ForceFrame& frame, const DeviceGeometry& geom) {
  return model.t * normalize(delta_forces(frame, geom), model.stats) - model.home_offset;
}

CommandVector predict_command(const SubjectModel& model, const ForceFrame& frame, const DeviceGeometry& geom) {
  return scale_output(model_output(model, frame, geom), model.scaling);
}

void write_model(std::ostream& out, const SubjectModel& model) {
  const auto& o = model.options;
  out << "# footif subject model\n";
  out << "[model]\n";
  out << "format_version = " << kModelFormatVersion << '\n';
  out << "subject = " << model.subject_id << '\n';
  out << "[options]\n";
  out << "seed = " << o.seed << '\n';
  out << "tolerance = " << format_double(o.tolerance) << '\n';
  out << "max_iterations = " << o.max_iterations << '\n';
  out << "window = " << o.window << '\n';
  out << "band_fractions = " << join(Eigen::Vector4d(o.band_fractions.data())) << '\n';
  out << "[normalization]\n";
  out << "mean_n = " << join(model.stats.mean) << '\n';
  out << "sigma_n = " << join(model.stats.sigma) << '\n';
  out << "[mapping]\n";
  for (std::size_t d = 0; d < 4; ++d) {
    out << "t_" << kDofNames[d] << " = " << join(Eigen::VectorXd(model.t.row(static_cast<Eigen::Index>(d)).transpose()))
        << '\n';
  }
  out << "home_offset = " << join(model.home_offset) << '\n';
  Eigen::Vector4d mn, mx, lo, hi;
  for (std::size_t d = 0; d < 4; ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    mn[i] = model.scaling.range[d].min;
    mx[i] = model.scaling.range[d].max;
    lo[i] = model.scaling.band[d].lo;
    hi[i] = model.scaling.band[d].hi;
  }
  out << "[output]\n";
  out << "min = " << join(mn) << '\n';
  out << "max = " << join(mx) << '\n';
  out << "band_lo = " << join(lo) << '\n';
  out << "band_hi = " << join(hi) << '\n';
  out << "[diagnostics]\n";
  for (std::size_t d = 0; d < 4; ++d) {
    const auto& dg = model.diagnostics[d];
    out << "iterations_" << kDofNames[d] << " = " << dg.iterations << '\n';
    out << "correlations_" << kDofNames[d] << " = "
        << join(Eigen::Map<const Eigen::VectorXd>(dg.correlations.data(), static_cast<Eigen::Index>(dg.correlations.size())))
        << '\n';
    out << "ambiguous_" << kDofNames[d] << " = " << (dg.ambiguous ? 1 : 0) << '\n';
  }
}

void write_model(const std::filesystem::path& path, const SubjectModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_model(out, model);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

SubjectModel read_model(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  const int version = tree.get<int>("model.format_version", -1);
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::ParseError, "unsupported model format version " + std::to_string(version));
  }
  SubjectModel m;
  try {
    m.subject_id = tree.get<int>("model.subject");
    m.options.seed = tree.get<std::uint64_t>("options.seed");
    m.options.tolerance = parse_double(tree.get<std::string>("options.tolerance"));
    m.options.max_iterations = tree.get<int>("options.max_iterations");
    m.options.window = tree.get<std::size_t>("options.window");
  } catch (const pt::ptree_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  const Eigen::Vector4d fractions = parse_fixed<4>(tree, "options.band_fractions");
  for (std::size_t d = 0; d < 4; ++d) m.options.band_fractions[d] = fractions[static_cast<Eigen::Index>(d)];
  m.stats.mean = parse_fixed<8>(tree, "normalization.mean_n");
  m.stats.sigma = parse_fixed<8>(tree, "normalization.sigma_n");
  for (std::size_t d = 0; d < 4; ++d) {
    m.t.row(static_cast<Eigen::Index>(d)) = parse_fixed<8>(tree, std::string("mapping.t_") + kDofNames[d]).transpose();
  }
  m.home_offset = parse_fixed<4>(tree, "mapping.home_offset");
  const Eigen::Vector4d mn = parse_fixed<4>(tree, "output.min"), mx = parse_fixed<4>(tree, "output.max");
  const Eigen::Vector4d lo = parse_fixed<4>(tree, "output.band_lo"), hi = parse_fixed<4>(tree, "output.band_hi");
  for (std::size_t d = 0; d < 4; ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    m.scaling.range[d] = {mn[i], mx[i]};
    m.scaling.band[d] = {lo[i], hi[i]};
    m.diagnostics[d].iterations = tree.get<int>(std::string("diagnostics.iterations_") + kDofNames[d], 0);
    m.diagnostics[d].correlations =
        parse_doubles(tree.get<std::string>(std::string("diagnostics.correlations_") + kDofNames[d], ""));
    m.diagnostics[d].ambiguous = tree.get<int>(std::string("diagnostics.ambiguous_") + kDofNames[d], 0) != 0;
  }
  return m;
}

SubjectModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return read_model(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

DiagonalFrame diagonal_transform(std::span<const CommandVector> commands, Direction diagonal,
                                 const std::array<double, 4>& fractions) {
  const auto parts = diagonal_parts(diagonal);
  int a = static_cast<int>(single_axis(parts[0]).axis);
  int b = static_cast<int>(single_axis(parts[1]).axis);
  if (a > b) std::swap(a, b);
  constexpr double c = std::numbers::sqrt2 / 2.0;
  auto rotate = [&](Eigen::Vector4d v) {
    const double u = v[a], w = v[b];
    v[a] = c * u - c * w;
    v[b] = c * u + c * w;
    return v;
  };

  DiagonalFrame out;
  const Eigen::Vector4d ideal = rotate(direction_vector(diagonal));
  const int axis = std::abs(ideal[a]) > std::abs(ideal[b]) ? a : b;
  out.target = {static_cast<Axis>(axis), ideal[axis] > 0 ? 1 : -1};

  out.commands.reserve(commands.size());
  for (const auto& cmd : commands) {
    CommandVector r;
    r.unbanded = rotate(cmd.unbanded).cwiseMax(-1.0).cwiseMin(1.0);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double f = fractions[static_cast<std::size_t>(i)];
      r.value[i] = std::abs(r.unbanded[i]) <= f ? 0.0 : r.unbanded[i];
    }
    out.commands.push_back(r);
  }
  return out;
}

Accuracy direction_accuracy(std::span<const CommandVector> commands, Direction target,
                            const std::array<double, 4>& fractions) {
  std::vector<CommandVector> rotated;
  SignedAxis axis;
  std::array<bool, 4> compared = {true, true, true, true};
  if (is_diagonal(target)) {
    DiagonalFrame frame = diagonal_transform(commands, target, fractions);
    rotated = std::move(frame.commands);
    commands = rotated;
    axis = frame.target;
    compared[static_cast<std::size_t>(Axis::Yaw)] = false;
  } else {
    axis = single_axis(target);
  }

  Accuracy acc;
  const int t = static_cast<int>(axis.axis);
  for (const auto& cmd : commands) {
    bool any = false, others_zero = true;
    for (int i = 0; i < 4; ++i) {
      if (!compared[static_cast<std::size_t>(i)]) continue;
      if (cmd.value[i] != 0.0) any = true;
      if (i != t && cmd.value[i] != 0.0) others_zero = false;
    }
    if (!any) continue;
    ++acc.counted;
    if (others_zero && cmd.value[t] * axis.sign > 0.0) ++acc.correct;
  }
  acc.all_zero = acc.counted == 0;
  return acc;
}

}  // namespace footif
