#include "footif/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "footif/error.hpp"

namespace footif {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidGeometry, what);
}

Eigen::Matrix2d rotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

}  // namespace

DeviceGeometry::DeviceGeometry(const GeometryParams& params) : params_(params) {
  const auto& p = params_;
  require(p.base_length_cm > 0 && p.base_width_cm > 0, "base dimensions must be positive");
  require(p.mf_length_cm > 0 && p.mf_width_cm > 0, "mobile frame dimensions must be positive");
  require(p.base_guide_spacing_cm > 0 && p.mf_guide_spacing_cm > 0, "guide spacings must be positive");
  require(p.sole_lever_cm > 0 && p.heel_lever_cm > 0, "pitch lever arms must be positive");
  require(p.reference_offset_cm > 0, "reference offset d must be positive");
  require(p.limits.translation_cm > 0 && p.limits.yaw_rad > 0 && p.limits.pitch_rad > 0,
          "workspace limits must be positive");
  require(p.limits.yaw_rad < std::numbers::pi / 2, "yaw limit must stay below 90 degrees");

  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    const auto& s = p.springs.compression[i];
    const std::string tag = "spring " + std::to_string(i + 1) + ": ";
    require(s.stiffness_n_per_cm > 0, tag + "stiffness must be positive");
    require(s.fully_compressed_length_cm < s.installed_length_cm, tag + "fully compressed length must be below installed length");
    require(s.installed_length_cm <= s.free_length_cm, tag + "installed length must not exceed free length");
    require(s.pretension_n >= 0, tag + "pretension must be non-negative");
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& s = p.springs.torsion[i];
    const std::string tag = "spring " + std::to_string(i + 7) + ": ";
    require(s.stiffness_ncm_per_rad > 0, tag + "stiffness must be positive");
    require(s.pretension_n >= 0, tag + "pretension must be non-negative");
  }

  const double a = p.base_length_cm / 2, b = p.base_width_cm / 2, c = p.base_guide_spacing_cm / 2;
  const double am = p.mf_length_cm / 2, bm = p.mf_width_cm / 2, cm = p.mf_guide_spacing_cm / 2;
  base_points_ = {Eigen::Vector2d(0, a), Eigen::Vector2d(0, -a), Eigen::Vector2d(-b, c),
                  Eigen::Vector2d(b, c), Eigen::Vector2d(-b, -c), Eigen::Vector2d(b, -c)};
  mobile_points_ = {Eigen::Vector2d(0, am), Eigen::Vector2d(0, -am), Eigen::Vector2d(-bm, cm),
                    Eigen::Vector2d(bm, cm), Eigen::Vector2d(-bm, -cm), Eigen::Vector2d(bm, -cm)};
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    home_lengths_[static_cast<Eigen::Index>(i)] = (base_points_[i] - mobile_points_[i]).norm();
    require(home_lengths_[static_cast<Eigen::Index>(i)] > 0, "coincident attachment points");
  }

  require(closure_p() != 0.0, "bc' - b'c must be non-zero, yaw is unobservable otherwise");
  // The x/y denominator 8P(Q cos(phi) - M) must not vanish inside the yaw range.
  const double q = closure_q(), m = closure_m();
  const double lo = q * std::cos(p.limits.yaw_rad) - m;
  const double hi = q - m;
  require(lo * hi > 0, "forward kinematics denominator vanishes inside the yaw range");
}

ChannelVector DeviceGeometry::pretension() const {
  ChannelVector f;
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    f[static_cast<Eigen::Index>(i)] = params_.springs.compression[i].pretension_n;
  }
  f[6] = params_.springs.torsion[0].pretension_n;
  f[7] = params_.springs.torsion[1].pretension_n;
  return f;
}

DeviceGeometry DeviceGeometry::with_placement(SpringPlacement placement) const {
  GeometryParams p = params_;
  p.placement = placement;
  return DeviceGeometry(p);
}

double DeviceGeometry::closure_m() const {
  const auto& p = params_;
  return p.base_length_cm * p.base_width_cm + p.mf_length_cm * p.mf_width_cm;
}

double DeviceGeometry::closure_q() const {
  const auto& p = params_;
  return p.base_length_cm * p.mf_width_cm + p.mf_length_cm * p.base_width_cm;
}

double DeviceGeometry::closure_p() const {
  const auto& p = params_;
  return p.base_width_cm * p.mf_guide_spacing_cm - p.mf_width_cm * p.base_guide_spacing_cm;
}

void validate_frame(const ForceFrame& frame) {
  if (!std::isfinite(frame.t_s)) throw Error(ErrorCode::InvalidArgument, "non-finite timestamp");
  for (Eigen::Index i = 0; i < frame.force_n.size(); ++i) {
    const double f = frame.force_n[i];
    if (!std::isfinite(f) || f < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "load cell " + std::to_string(i + 1) + " reading must be finite and >= 0");
    }
  }
}

void validate_frames(const std::vector<ForceFrame>& frames) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    validate_frame(frames[i]);
    if (i > 0 && !(frames[i].t_s > frames[i - 1].t_s)) {
      throw Error(ErrorCode::InvalidArgument,
                  "timestamps must strictly increase (frame " + std::to_string(i) + ")");
    }
  }
}

GuideLengths inverse_kinematics(const PedalPose& pose, const DeviceGeometry& geom) {
  const Eigen::Matrix2d r = rotation(pose.yaw_rad);
  const Eigen::Vector2d p(pose.x_cm, pose.y_cm);
  GuideLengths out;
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    const double len = (p + r * geom.mobile_point(i) - geom.base_point(i)).norm();
    if (len == 0.0) {
      throw Error(ErrorCode::DegenerateGeometry,
                  "guide " + std::to_string(i + 1) + " has zero length");
    }
    out.cm[static_cast<Eigen::Index>(i)] = len;
  }
  return out;
}

PlanarPose forward_kinematics(const GuideLengths& lengths, const DeviceGeometry& geom) {
  const Vector6d sq = lengths.cm.array().square();
  const double e = sq[3] + sq[4] - sq[2] - sq[5];
  const double f = sq[2] + sq[4] - sq[3] - sq[5];
  const double g = sq[1] - sq[0];

  const auto& gp = geom.params();
  const double a = gp.base_length_cm, b = gp.base_width_cm;
  const double am = gp.mf_length_cm, bm = gp.mf_width_cm;
  const double m = geom.closure_m(), q = geom.closure_q(), p = geom.closure_p();

  if (std::abs(e) > 2.0 * std::abs(p)) {
    throw Error(ErrorCode::OutOfDomain, "|E| exceeds 2|P|, lengths are not reachable");
  }
  // Equals 2P cos(phi) for either sign of P.
  const double root = std::copysign(std::sqrt(4.0 * p * p - e * e), p);
  const double lhs = 4.0 * q * root;
  const double rhs = 8.0 * p * m;
  const double den = lhs - rhs;
  if (den == 0.0 || std::abs(den) <= 1e-12 * (std::abs(lhs) + std::abs(rhs))) {
    throw Error(ErrorCode::SingularDenominator, "4Q*sqrt(4P^2-E^2) - 8PM vanishes");
  }

  PlanarPose out;
  out.yaw_rad = std::asin(e / (2.0 * p));
  out.x_cm = (f * (am * root - 2.0 * a * p) - 2.0 * bm * e * g) / den;
  out.y_cm = (2.0 * g * (bm * root - 2.0 * b * p) + am * e * f) / den;
  return out;
}

GuideLengths lengths_from_forces(const ForceFrame& frame, const DeviceGeometry& geom) {
  GuideLengths out;
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    const auto& s = geom.springs().compression[i];
    const auto idx = static_cast<Eigen::Index>(i);
    out.cm[idx] = geom.home_length(i) + (frame.force_n[idx] - s.pretension_n) / s.stiffness_n_per_cm;
  }
  return out;
}

double spring_length(std::size_t i, double guide_length_cm, const DeviceGeometry& geom) {
  const auto& s = geom.springs().compression[i];
  const double travel = guide_length_cm - geom.home_length(i);
  return geom.placement() == SpringPlacement::OutsideBase ? s.installed_length_cm - travel
                                                         : s.installed_length_cm + travel;
}

PitchEstimate pitch_from_forces(double f7_n, double f8_n, const DeviceGeometry& geom) {
  const auto& gp = geom.params();
  const auto& t = gp.springs.torsion;
  PitchEstimate out;
  out.moment_ncm = (f7_n - t[0].pretension_n) * gp.sole_lever_cm -
                   (f8_n - t[1].pretension_n) * gp.heel_lever_cm;
  if (out.moment_ncm > 0) {
    out.unclamped_rad = out.moment_ncm / t[0].stiffness_ncm_per_rad;
  } else if (out.moment_ncm < 0) {
    out.unclamped_rad = out.moment_ncm / t[1].stiffness_ncm_per_rad;
  }
  const double lim = geom.limits().pitch_rad;
  out.pitch_rad = std::clamp(out.unclamped_rad, -lim, lim);
  return out;
}

PedalPose pose_from_forces(const ForceFrame& frame, const DeviceGeometry& geom) {
  const PlanarPose planar = forward_kinematics(lengths_from_forces(frame, geom), geom);
  const PitchEstimate pitch = pitch_from_forces(frame.force_n[6], frame.force_n[7], geom);
  return clamp_to_workspace({planar.x_cm, planar.y_cm, planar.yaw_rad, pitch.pitch_rad}, geom);
}

ContactMode mode_classify(const ForceFrame& frame, const DeviceGeometry& geom) {
  ContactMode out;
  const GuideLengths lengths = lengths_from_forces(frame, geom);
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    const double len = spring_length(i, lengths[i], geom);
    if (len <= geom.springs().compression[i].fully_compressed_length_cm) {
      out.saturated.push_back(static_cast<int>(i) + 1);
    }
  }
  const PitchEstimate pitch = pitch_from_forces(frame.force_n[6], frame.force_n[7], geom);
  const double lim = geom.limits().pitch_rad;
  if (pitch.unclamped_rad >= lim) out.saturated.push_back(7);
  if (pitch.unclamped_rad <= -lim) out.saturated.push_back(8);
  out.mode = out.saturated.empty() ? Mode::Elastic : Mode::Isometric;
  return out;
}

bool workspace_contains(const PedalPose& pose, const DeviceGeometry& geom) {
  const auto& lim = geom.limits();
  return std::abs(pose.x_cm) <= lim.translation_cm && std::abs(pose.y_cm) <= lim.translation_cm &&
         std::abs(pose.yaw_rad) <= lim.yaw_rad && std::abs(pose.pitch_rad) <= lim.pitch_rad;
}

PedalPose clamp_to_workspace(const PedalPose& pose, const DeviceGeometry& geom) {
  const auto& lim = geom.limits();
  return {std::clamp(pose.x_cm, -lim.translation_cm, lim.translation_cm),
          std::clamp(pose.y_cm, -lim.translation_cm, lim.translation_cm),
          std::clamp(pose.yaw_rad, -lim.yaw_rad, lim.yaw_rad),
          std::clamp(pose.pitch_rad, -lim.pitch_rad, lim.pitch_rad)};
}

}  // namespace footif
