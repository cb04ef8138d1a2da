#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "footif/device_model.hpp"

namespace footif {

/// (F_x, F_y, M_z, M_x). Units: N, N, N*cm, N*cm.
///
/// Sign convention: `resultant_wrench` and `structure_matrix` give the wrench
/// the operator applies to hold the pedal against the spring forces, i.e. the
/// gradient of the elastic energy. The springs push back with the negated
/// wrench, see `restoring_wrench`.
struct Wrench {
  double fx_n = 0.0;
  double fy_n = 0.0;
  double mz_ncm = 0.0;
  double mx_ncm = 0.0;

  [[nodiscard]] Eigen::Vector4d as_vector() const { return {fx_n, fy_n, mz_ncm, mx_ncm}; }
  static Wrench from_vector(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

using StructureMatrix = Eigen::Matrix<double, 4, 8>;
using StiffnessMatrix = Eigen::Matrix4d;

/// Column i (0-based, i < 6) is the gradient of guide length L_i with respect
/// to (x, y, yaw): (-u_i, det(u_i, R b_i)), u_i = (A_i - B_i) / L_i. The pitch
/// row carries [b7, -b8]. Throws Error(DegenerateGeometry) on a zero-length guide.
StructureMatrix structure_matrix(const PedalPose& pose, const DeviceGeometry& geom);

/// J_s times the delta element forces of `frame`. For InsideBase placement the
/// delta forces of the six struts are sign-flipped so that the wrench keeps
/// pointing along the energy gradient.
Wrench resultant_wrench(const ForceFrame& frame, const PedalPose& pose, const DeviceGeometry& geom);

/// Hessian of guide length i with respect to (x, y, yaw).
Eigen::Matrix3d guide_length_hessian(std::size_t i, const PedalPose& pose, const DeviceGeometry& geom);

/// Derivative of `resultant_wrench` with respect to (x, y, yaw, pitch) when
/// the element forces follow the springs: J C J^T plus the force-weighted
/// guide curvature, with the pitch stiffness picked by the sign of M_x.
StiffnessMatrix stiffness_matrix(const PedalPose& pose, const ForceFrame& frame, const DeviceGeometry& geom);

/// Torsion stiffness acting at pitch `pitch_rad`: k7 for pitch >= 0, else k8.
double pitch_stiffness(double pitch_rad, const DeviceGeometry& geom);

/// Potential energy (N*cm) of the six compression springs measured from their
/// unloaded state plus the torsion springs, relative to the home pose.
double elastic_energy(const PedalPose& pose, const DeviceGeometry& geom);

/// Wrench the spring network exerts on the pedal at `pose`, total spring
/// forces included. Equals minus the energy gradient.
Wrench restoring_wrench(const PedalPose& pose, const DeviceGeometry& geom);

struct GridSpec {
  std::size_t nx = 51;
  std::size_t ny = 51;
  std::size_t nphi = 25;
};

struct GridPoint {
  std::size_t ix = 0, iy = 0, iphi = 0;
  double x_cm = 0.0, y_cm = 0.0, yaw_rad = 0.0;
  double energy_ncm = 0.0;
};

/// Energies on a regular (x, y, yaw) grid spanning the workspace at zero pitch.
struct EnergyLandscape {
  std::vector<double> xs_cm;
  std::vector<double> ys_cm;
  std::vector<double> phis_rad;
  /// Offset so the smallest value is 0; index (ix * ny + iy) * nphi + iphi.
  std::vector<double> energy_ncm;
  double offset_ncm = 0.0;
  /// Cells strictly below every in-grid neighbour.
  std::vector<GridPoint> minima;
  /// Cells not above any neighbour but tied with at least one.
  std::vector<GridPoint> plateau_candidates;

  [[nodiscard]] std::size_t index(std::size_t ix, std::size_t iy, std::size_t iphi) const {
    return (ix * ys_cm.size() + iy) * phis_rad.size() + iphi;
  }
};

/// Throws Error(InvalidArgument) when any axis has fewer than 21 points.
EnergyLandscape energy_scan(const DeviceGeometry& geom, const GridSpec& grid);

}  // namespace footif
