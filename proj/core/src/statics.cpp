#include "footif/statics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "footif/error.hpp"

namespace footif {
namespace {

Eigen::Matrix2d rotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

double placement_sign(const DeviceGeometry& geom) {
  return geom.placement() == SpringPlacement::OutsideBase ? 1.0 : -1.0;
}

// d_i = B_i - A_i and its derivative along yaw.
struct GuideVector {
  Eigen::Vector2d d;
  Eigen::Vector2d rb;  // R b_i
  double length;
};

GuideVector guide_vector(std::size_t i, const PedalPose& pose, const DeviceGeometry& geom) {
  const Eigen::Vector2d rb = rotation(pose.yaw_rad) * geom.mobile_point(i);
  GuideVector g;
  g.d = Eigen::Vector2d(pose.x_cm, pose.y_cm) + rb - geom.base_point(i);
  g.rb = rb;
  g.length = g.d.norm();
  if (g.length == 0.0) {
    throw Error(ErrorCode::DegenerateGeometry, "guide " + std::to_string(i + 1) + " has zero length");
  }
  return g;
}

Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }

}  // namespace

StructureMatrix structure_matrix(const PedalPose& pose, const DeviceGeometry& geom) {
  StructureMatrix js = StructureMatrix::Zero();
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    const GuideVector g = guide_vector(i, pose, geom);
    const Eigen::Vector2d grad_p = g.d / g.length;  // -u_i
    const auto col = static_cast<Eigen::Index>(i);
    js(0, col) = grad_p.x();
    js(1, col) = grad_p.y();
    js(2, col) = grad_p.dot(perp(g.rb));
  }
  js(3, 6) = geom.params().sole_lever_cm;
  js(3, 7) = -geom.params().heel_lever_cm;
  return js;
}

Wrench resultant_wrench(const ForceFrame& frame, const PedalPose& pose, const DeviceGeometry& geom) {
  ChannelVector delta = frame.force_n - geom.pretension();
  delta.head<6>() *= placement_sign(geom);
  return Wrench::from_vector(structure_matrix(pose, geom) * delta);
}

Eigen::Matrix3d guide_length_hessian(std::size_t i, const PedalPose& pose, const DeviceGeometry& geom) {
  const GuideVector g = guide_vector(i, pose, geom);
  Eigen::Matrix<double, 2, 3> grad_d;
  grad_d << Eigen::Matrix2d::Identity(), perp(g.rb);
  const Eigen::Vector3d grad_l = grad_d.transpose() * g.d / g.length;
  Eigen::Matrix3d h = grad_d.transpose() * grad_d - grad_l * grad_l.transpose();
  h(2, 2) -= g.d.dot(g.rb);
  return h / g.length;
}

double pitch_stiffness(double pitch_rad, const DeviceGeometry& geom) {
  const auto& t = geom.springs().torsion;
  return pitch_rad >= 0.0 ? t[0].stiffness_ncm_per_rad : t[1].stiffness_ncm_per_rad;
}

StiffnessMatrix stiffness_matrix(const PedalPose& pose, const ForceFrame& frame, const DeviceGeometry& geom) {
  const StructureMatrix js = structure_matrix(pose, geom);
  const Eigen::Matrix<double, 3, 6> j = js.topLeftCorner<3, 6>();
  Vector6d k;
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    k[static_cast<Eigen::Index>(i)] = geom.springs().compression[i].stiffness_n_per_cm;
  }
  const ChannelVector delta = frame.force_n - geom.pretension();
  const double s = placement_sign(geom);

  StiffnessMatrix out = StiffnessMatrix::Zero();
  Eigen::Matrix3d planar = j * k.asDiagonal() * j.transpose();
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    planar += s * delta[static_cast<Eigen::Index>(i)] * guide_length_hessian(i, pose, geom);
  }
  out.topLeftCorner<3, 3>() = planar;

  const double mx = js.row(3).dot(delta);
  const auto& t = geom.springs().torsion;
  out(3, 3) = mx > 0.0 ? t[0].stiffness_ncm_per_rad : t[1].stiffness_ncm_per_rad;
  return out;
}

double elastic_energy(const PedalPose& pose, const DeviceGeometry& geom) {
  const GuideLengths lengths = inverse_kinematics(pose, geom);
  const double s = placement_sign(geom);
  double u = 0.0;
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    const auto& spring = geom.springs().compression[i];
    const double dl = lengths[i] - geom.home_length(i);
    u += 0.5 * spring.stiffness_n_per_cm * dl * dl + s * spring.pretension_n * dl;
  }
  u += 0.5 * pitch_stiffness(pose.pitch_rad, geom) * pose.pitch_rad * pose.pitch_rad;
  return u;
}

Wrench restoring_wrench(const PedalPose& pose, const DeviceGeometry& geom) {
  const StructureMatrix js = structure_matrix(pose, geom);
  const GuideLengths lengths = inverse_kinematics(pose, geom);
  const double s = placement_sign(geom);
  Vector6d element;
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    const auto& spring = geom.springs().compression[i];
    const double dl = lengths[i] - geom.home_length(i);
    element[static_cast<Eigen::Index>(i)] = spring.stiffness_n_per_cm * dl + s * spring.pretension_n;
  }
  Eigen::Vector4d w;
  w.head<3>() = -(js.topLeftCorner<3, 6>() * element);
  w[3] = -pitch_stiffness(pose.pitch_rad, geom) * pose.pitch_rad;
  return Wrench::from_vector(w);
}

EnergyLandscape energy_scan(const DeviceGeometry& geom, const GridSpec& grid) {
  if (grid.nx < 21 || grid.ny < 21 || grid.nphi < 21) {
    throw Error(ErrorCode::InvalidArgument, "energy grid needs at least 21 points per axis");
  }
  const auto& lim = geom.limits();
  auto axis = [](std::size_t n, double half) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
  };

  EnergyLandscape land;
  land.xs_cm = axis(grid.nx, lim.translation_cm);
  land.ys_cm = axis(grid.ny, lim.translation_cm);
  land.phis_rad = axis(grid.nphi, lim.yaw_rad);
  land.energy_ncm.resize(grid.nx * grid.ny * grid.nphi);

  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t ix = 0; ix < grid.nx; ++ix) {
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
      for (std::size_t ip = 0; ip < grid.nphi; ++ip) {
        const double u = elastic_energy({land.xs_cm[ix], land.ys_cm[iy], land.phis_rad[ip], 0.0}, geom);
        land.energy_ncm[land.index(ix, iy, ip)] = u;
        lowest = std::min(lowest, u);
      }
    }
  }
  land.offset_ncm = lowest;
  for (double& u : land.energy_ncm) u -= lowest;

  const auto nx = static_cast<long>(grid.nx), ny = static_cast<long>(grid.ny), np = static_cast<long>(grid.nphi);
  for (long ix = 0; ix < nx; ++ix) {
    for (long iy = 0; iy < ny; ++iy) {
      for (long ip = 0; ip < np; ++ip) {
        const double u = land.energy_ncm[land.index(ix, iy, ip)];
        bool strict = true;
        bool not_above = true;
        for (long dx = -1; dx <= 1 && not_above; ++dx) {
          for (long dy = -1; dy <= 1 && not_above; ++dy) {
            for (long dp = -1; dp <= 1; ++dp) {
              if (dx == 0 && dy == 0 && dp == 0) continue;
              const long jx = ix + dx, jy = iy + dy, jp = ip + dp;
              if (jx < 0 || jy < 0 || jp < 0 || jx >= nx || jy >= ny || jp >= np) continue;
              const double v = land.energy_ncm[land.index(jx, jy, jp)];
              if (v < u) {
                not_above = false;
                break;
              }
              if (v == u) strict = false;
            }
          }
        }
        if (!not_above) continue;
        const auto ux = static_cast<std::size_t>(ix), uy = static_cast<std::size_t>(iy),
                   up = static_cast<std::size_t>(ip);
        GridPoint pt{ux, uy, up, land.xs_cm[ux], land.ys_cm[uy], land.phis_rad[up], u};
        (strict ? land.minima : land.plateau_candidates).push_back(pt);
      }
    }
  }
  return land;
}

}  // namespace footif
