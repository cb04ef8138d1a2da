#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "footif/device_model.hpp"

namespace footif::test {

inline PedalPose random_pose(std::mt19937_64& rng, const DeviceGeometry& geom) {
  const auto& lim = geom.limits();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng) * lim.translation_cm, u(rng) * lim.translation_cm, u(rng) * lim.yaw_rad, u(rng) * lim.pitch_rad};
}

/// Guide lengths straight from the documented attachment points, kept apart
/// from the library so it can serve as an oracle.
inline Vector6d reference_lengths(const PedalPose& pose, const GeometryParams& g) {
  const double a = g.base_length_cm, b = g.base_width_cm, ap = g.mf_length_cm, bp = g.mf_width_cm;
  const double c = g.base_guide_spacing_cm, cp = g.mf_guide_spacing_cm;
  const double base[6][2] = {{0, a / 2}, {0, -a / 2}, {-b / 2, c / 2}, {b / 2, c / 2}, {-b / 2, -c / 2}, {b / 2, -c / 2}};
  const double mf[6][2] = {{0, ap / 2}, {0, -ap / 2}, {-bp / 2, cp / 2}, {bp / 2, cp / 2}, {-bp / 2, -cp / 2}, {bp / 2, -cp / 2}};
  const double co = std::cos(pose.yaw_rad), si = std::sin(pose.yaw_rad);
  Vector6d out;
  for (int i = 0; i < 6; ++i) {
    const double px = pose.x_cm + co * mf[i][0] - si * mf[i][1];
    const double py = pose.y_cm + si * mf[i][0] + co * mf[i][1];
    out[i] = std::hypot(base[i][0] - px, base[i][1] - py);
  }
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("footif_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace footif::test
