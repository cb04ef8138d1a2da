#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "footif/device_model.hpp"
#include "footif/error.hpp"
#include "footif/synthetic_subject.hpp"
#include "support.hpp"

using namespace footif;

namespace {

const DeviceGeometry kGeom = DeviceGeometry::defaults();

ForceFrame home_frame() {
  ForceFrame f;
  f.force_n = kGeom.pretension();
  return f;
}

}  // namespace

TEST(Geometry, HomeLengthsMatchAttachmentDistances) {
  const Vector6d ref = test::reference_lengths({}, kGeom.params());
  for (std::size_t i = 0; i < kPlanarSprings; ++i) {
    EXPECT_NEAR(kGeom.home_length(i), ref[static_cast<Eigen::Index>(i)], 1e-14);
  }
  EXPECT_DOUBLE_EQ(kGeom.home_length(0), 5.0);
  EXPECT_DOUBLE_EQ(kGeom.home_length(1), 5.0);
  for (std::size_t i = 2; i < 6; ++i) EXPECT_NEAR(kGeom.home_length(i), std::sqrt(29.0), 1e-14);
}

TEST(Geometry, RejectsZeroClosureP) {
  GeometryParams p;
  p.mf_guide_spacing_cm = p.base_guide_spacing_cm * p.mf_width_cm / p.base_width_cm;  // bc' = b'c
  EXPECT_THROW({ DeviceGeometry g(p); }, Error);
}

TEST(Geometry, RejectsBadSpring) {
  GeometryParams p;
  p.springs.compression[2].stiffness_n_per_cm = 0.0;
  try {
    DeviceGeometry g(p);
    FAIL() << "expected InvalidGeometry";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGeometry);
  }
}

TEST(InverseKinematics, HomeGivesHomeLengths) {
  const GuideLengths l = inverse_kinematics({}, kGeom);
  EXPECT_TRUE(l.cm.isApprox(kGeom.home_lengths(), 1e-15));
}

TEST(InverseKinematics, GoldenPose) {
  // 40-digit evaluation of |A_i - (p + R(phi) B_i)|.
  const double golden[6] = {5.5395422858396632621, 4.9088341190497524395, 6.475987265647988097,
                            4.8507024072249464597, 6.5932325135540286851, 4.2531351185444727094};
  const GuideLengths l = inverse_kinematics(pose_deg(1.0, -0.5, 5.0, 0.0), kGeom);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(l[i], golden[i], 1e-13) << "spring " << i + 1;
}

TEST(InverseKinematics, MatchesAttachmentOracle) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 200; ++n) {
    const PedalPose p = test::random_pose(rng, kGeom);
    const Vector6d ref = test::reference_lengths(p, kGeom.params());
    EXPECT_LT((inverse_kinematics(p, kGeom).cm - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(InverseKinematics, MirrorSymmetry) {
  // x -> -x, yaw -> -yaw swaps the left and right guides.
  std::mt19937_64 rng(5);
  for (int n = 0; n < 100; ++n) {
    const PedalPose p = test::random_pose(rng, kGeom);
    const PedalPose m{-p.x_cm, p.y_cm, -p.yaw_rad, p.pitch_rad};
    const GuideLengths a = inverse_kinematics(p, kGeom);
    const GuideLengths b = inverse_kinematics(m, kGeom);
    EXPECT_NEAR(a[0], b[0], 1e-12);
    EXPECT_NEAR(a[1], b[1], 1e-12);
    EXPECT_NEAR(a[2], b[3], 1e-12);
    EXPECT_NEAR(a[3], b[2], 1e-12);
    EXPECT_NEAR(a[4], b[5], 1e-12);
    EXPECT_NEAR(a[5], b[4], 1e-12);
  }
}

TEST(ForwardKinematics, HomeLengthsGiveHome) {
  GuideLengths l;
  l.cm = kGeom.home_lengths();
  const PlanarPose p = forward_kinematics(l, kGeom);
  EXPECT_NEAR(p.x_cm, 0.0, 1e-12);
  EXPECT_NEAR(p.y_cm, 0.0, 1e-12);
  EXPECT_NEAR(p.yaw_rad, 0.0, 1e-12);
}

TEST(ForwardKinematics, Roundtrip) {
  const PedalPose target = pose_deg(1.5, 1.0, -8.0, 0.0);
  const PlanarPose p = forward_kinematics(inverse_kinematics(target, kGeom), kGeom);
  EXPECT_NEAR(p.x_cm, 1.5, 1e-9);
  EXPECT_NEAR(p.y_cm, 1.0, 1e-9);
  EXPECT_NEAR(p.yaw_rad, deg_to_rad(-8.0), 1e-9);
}

TEST(ForwardKinematics, RoundtripSweep) {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const PedalPose pose = test::random_pose(rng, kGeom);
    const PlanarPose p = forward_kinematics(inverse_kinematics(pose, kGeom), kGeom);
    worst = std::max({worst, std::abs(p.x_cm - pose.x_cm), std::abs(p.y_cm - pose.y_cm),
                      std::abs(p.yaw_rad - pose.yaw_rad)});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(ForwardKinematics, RoundtripWithNegativeClosureP) {
  GeometryParams g;
  g.mf_guide_spacing_cm = 8.0;  // bc' - b'c < 0
  const DeviceGeometry geom(g);
  ASSERT_LT(geom.closure_p(), 0.0);
  std::mt19937_64 rng(13);
  for (int n = 0; n < 200; ++n) {
    const PedalPose pose = test::random_pose(rng, geom);
    const PlanarPose p = forward_kinematics(inverse_kinematics(pose, geom), geom);
    EXPECT_NEAR(p.x_cm, pose.x_cm, 1e-9);
    EXPECT_NEAR(p.y_cm, pose.y_cm, 1e-9);
    EXPECT_NEAR(p.yaw_rad, pose.yaw_rad, 1e-9);
  }
}

TEST(ForwardKinematics, OutOfDomain) {
  GuideLengths l;
  l.cm = kGeom.home_lengths();
  l.cm[3] += 20.0;  // |E| far beyond 2|P|
  try {
    forward_kinematics(l, kGeom);
    FAIL() << "expected OutOfDomain";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
  }
}

TEST(Hooke, PretensionGivesHomeLengths) {
  const GuideLengths l = lengths_from_forces(home_frame(), kGeom);
  EXPECT_TRUE(l.cm.isApprox(kGeom.home_lengths(), 1e-15));
}

TEST(Hooke, DeltaForceOfTwoStiffnessUnits) {
  ForceFrame f = home_frame();
  f.force_n.head<6>().array() += 0.04;
  const GuideLengths l = lengths_from_forces(f, kGeom);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(l[i], kGeom.home_length(i) + 2.0, 1e-12);
}

TEST(Hooke, RecoversSynthesizedLengths) {
  std::mt19937_64 rng(17);
  for (int n = 0; n < 100; ++n) {
    const GuideLengths target = inverse_kinematics(test::random_pose(rng, kGeom), kGeom);
    ForceFrame f = home_frame();
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& s = kGeom.springs().compression[i];
      f.force_n[static_cast<Eigen::Index>(i)] = s.pretension_n + s.stiffness_n_per_cm * (target[i] - kGeom.home_length(i));
    }
    EXPECT_LT((lengths_from_forces(f, kGeom).cm - target.cm).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pitch, Balanced) {
  EXPECT_EQ(pitch_from_forces(0.0, 0.0, kGeom).pitch_rad, 0.0);
}

TEST(Pitch, OneDegreePerStiffnessUnit) {
  const PitchEstimate p = pitch_from_forces(46.3 / 8.0, 0.0, kGeom);
  EXPECT_NEAR(rad_to_deg(p.pitch_rad), 1.0, 1e-12);
  EXPECT_NEAR(p.moment_ncm, 46.3, 1e-12);
  EXPECT_NEAR(rad_to_deg(pitch_from_forces(0.0, 46.3 / 8.0, kGeom).pitch_rad), -1.0, 1e-12);
}

TEST(Pitch, ClampsAndSaturatesBeyondLimit) {
  const double f7 = 46.3 * 15.0 / 8.0;
  EXPECT_NEAR(rad_to_deg(pitch_from_forces(f7, 0.0, kGeom).pitch_rad), 10.0, 1e-12);
  ForceFrame f = home_frame();
  f.force_n[6] = f7;
  const ContactMode m = mode_classify(f, kGeom);
  EXPECT_EQ(m.mode, Mode::Isometric);
  EXPECT_EQ(m.saturated, std::vector<int>{7});
}

TEST(PoseFromForces, HomeFrame) {
  EXPECT_EQ(pose_from_forces(home_frame(), kGeom), PedalPose{});
}

TEST(PoseFromForces, RecoversSynthesizedPose) {
  const PedalPose target = pose_deg(-1.0, 2.0, 6.0, -4.0);
  const PedalPose p = pose_from_forces(forces_for_pose(target, kGeom), kGeom);
  EXPECT_LT((p.as_vector() - target.as_vector()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(PoseFromForces, SaturatedSpringLandsOnBoundary) {
  // At y = 2 the back guide has used its whole compression stroke; pushing on
  // raises the force on spring 2 without moving the pedal.
  ForceFrame f = forces_for_pose({0.0, 2.0, 0.0, 0.0}, kGeom);
  f.force_n[1] += 0.1;
  const PedalPose p = pose_from_forces(f, kGeom);
  EXPECT_TRUE(workspace_contains(p, kGeom));
  EXPECT_NEAR(p.y_cm, 2.0, 1e-9);
  EXPECT_NEAR(p.x_cm, 0.0, 1e-9);
  const ContactMode m = mode_classify(f, kGeom);
  EXPECT_EQ(m.mode, Mode::Isometric);
  EXPECT_EQ(m.saturated, std::vector<int>{2});
}

TEST(Mode, HomeIsElastic) {
  const ContactMode m = mode_classify(home_frame(), kGeom);
  EXPECT_EQ(m.mode, Mode::Elastic);
  EXPECT_TRUE(m.saturated.empty());
}

TEST(Mode, SpringThreeFullyCompressed) {
  // Outside placement: spring length = installed - travel, so 1.2 cm needs 2 cm of travel.
  ForceFrame f = home_frame();
  f.force_n[2] += 0.02 * 2.0;
  ASSERT_NEAR(spring_length(2, lengths_from_forces(f, kGeom)[2], kGeom), 1.2, 1e-12);
  const ContactMode m = mode_classify(f, kGeom);
  EXPECT_EQ(m.mode, Mode::Isometric);
  EXPECT_EQ(m.saturated, std::vector<int>{3});
}

TEST(Mode, PitchTwelveDegrees) {
  ForceFrame f = home_frame();
  f.force_n[6] = 46.3 * 12.0 / 8.0;
  const ContactMode m = mode_classify(f, kGeom);
  EXPECT_EQ(m.mode, Mode::Isometric);
  EXPECT_EQ(m.saturated, std::vector<int>{7});
}

TEST(Workspace, Bounds) {
  EXPECT_TRUE(workspace_contains({}, kGeom));
  EXPECT_TRUE(workspace_contains({2.0, 0.0, 0.0, 0.0}, kGeom));
  EXPECT_FALSE(workspace_contains(pose_deg(0.0, 0.0, 13.0, 0.0), kGeom));
  EXPECT_FALSE(workspace_contains({0.0, -2.0001, 0.0, 0.0}, kGeom));
  EXPECT_TRUE(workspace_contains(pose_deg(0.0, 0.0, 0.0, -10.0), kGeom));
}

TEST(Frames, ValidationRejectsNegativeAndNonMonotonic) {
  ForceFrame f = home_frame();
  f.force_n[4] = -0.1;
  EXPECT_THROW(validate_frame(f), Error);
  ForceFrame a = home_frame(), b = home_frame();
  a.t_s = 0.02;
  b.t_s = 0.02;
  EXPECT_THROW(validate_frames({a, b}), Error);
}
