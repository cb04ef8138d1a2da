#include <cmath>
#include <functional>
#include <random>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "footif/error.hpp"
#include "footif/subject_mapping.hpp"
#include "footif/synthetic_subject.hpp"

using namespace footif;

namespace {

const DeviceGeometry kGeom = DeviceGeometry::defaults();

template <typename F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

CommandVector cmd(double x, double y, double yaw, double pitch) {
  CommandVector c;
  c.value = {x, y, yaw, pitch};
  c.unbanded = c.value;
  return c;
}

SubjectModel calibrated(const SyntheticSubject& s) {
  return fit_ica(build_calibration_set(test::single_direction_trials(s, kGeom), kGeom), {}, s.id);
}

SyntheticSubject rotated_subject(double deg, double noise = 0.05) {
  SyntheticSubject s;
  s.id = 2;
  s.distortion = make_distortion(deg, 0.0, 0.0, Eigen::Vector4d::Ones());
  s.noise_sigma = noise;
  s.seed = 77;
  return s;
}

double mean_accuracy(const std::vector<TrialRecord>& trials, const std::function<CommandVector(const ForceFrame&)>& map) {
  std::size_t correct = 0, counted = 0;
  for (const auto& t : trials) {
    std::vector<CommandVector> cmds;
    for (const auto& f : filter_frames(t.frames, 9)) cmds.push_back(map(f));
    const Accuracy a = direction_accuracy(cmds, t.id.direction);
    correct += a.correct;
    counted += a.counted;
  }
  return static_cast<double>(correct) / static_cast<double>(counted);
}

}  // namespace

TEST(Normalization, HomeFrameHasZeroDelta) {
  ForceFrame f;
  f.force_n = kGeom.pretension();
  EXPECT_EQ(delta_forces(f, kGeom), ChannelVector::Zero());
}

TEST(Normalization, TwoSampleChannel) {
  const std::vector<ChannelVector> s = {ChannelVector::Zero(), ChannelVector::Constant(2.0)};
  const ZScore z = zscore_stats(s);
  for (int i = 0; i < 8; ++i) {
    EXPECT_DOUBLE_EQ(z.mean[i], 1.0);
    EXPECT_DOUBLE_EQ(z.sigma[i], std::sqrt(2.0));
  }
  EXPECT_NEAR(normalize(s[0], z)[0], -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(normalize(s[1], z)[5], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(normalize(z.mean, z), ChannelVector::Zero());
}

TEST(Normalization, RoundtripAndErrors) {
  ZScore z;
  z.mean << 1, -2, 3, 0.5, 0, 7, 1e-3, 4;
  z.sigma << 0.1, 2, 3, 0.7, 1e-4, 9, 0.2, 1;
  const ChannelVector v = (ChannelVector() << 0.3, -1, 8, 2, 1e-5, 3, 0.0, -4).finished();
  EXPECT_LT((denormalize(normalize(v, z), z) - v).cwiseAbs().maxCoeff(), 1e-12);
  expect_error(ErrorCode::TooShort, [] { zscore_stats(std::vector<ChannelVector>{ChannelVector::Ones()}); });
  std::vector<ChannelVector> flat = {ChannelVector::Zero(), ChannelVector::Constant(1.0)};
  flat[1][3] = 0.0;
  expect_error(ErrorCode::ConstantChannel, [&] { zscore_stats(flat); });
}

TEST(ZeroBand, KinematicRangesGivePrintedBands) {
  EXPECT_DOUBLE_EQ(zero_band_from_range({-2.0, 2.0}, 0.3).lo, -0.6);
  EXPECT_DOUBLE_EQ(zero_band_from_range({-2.0, 2.0}, 0.3).hi, 0.6);
  EXPECT_DOUBLE_EQ(zero_band_from_range({-12.5, 12.5}, 0.4).lo, -5.0);
  EXPECT_DOUBLE_EQ(zero_band_from_range({-12.5, 12.5}, 0.4).hi, 5.0);
  EXPECT_DOUBLE_EQ(zero_band_from_range({-10.0, 10.0}, 0.4).lo, -4.0);
  EXPECT_DOUBLE_EQ(zero_band_from_range({-10.0, 10.0}, 0.4).hi, 4.0);
  const OutputScaling k = kinematic_scaling(kGeom);
  EXPECT_DOUBLE_EQ(k.band[0].hi, 0.6);
  EXPECT_DOUBLE_EQ(k.band[1].lo, -0.6);
  EXPECT_DOUBLE_EQ(k.band[2].hi, 5.0);
  EXPECT_DOUBLE_EQ(k.band[3].lo, -4.0);
}

TEST(ZeroBand, AsymmetricAndDegenerateRanges) {
  const ZeroBand b = zero_band_from_range({-1.0, 3.0}, 0.3);
  EXPECT_DOUBLE_EQ(b.lo, -0.3);
  EXPECT_NEAR(b.hi, 0.9, 1e-15);
  expect_error(ErrorCode::DegenerateRange, [] { zero_band_from_range({0.5, 3.0}, 0.3); });
  expect_error(ErrorCode::DegenerateRange, [] { zero_band_from_range({-1.0, 0.0}, 0.3); });
}

TEST(ScaleOutput, PiecewiseRangeBandAndClamp) {
  OutputScaling s;
  s.range = {DofRange{-2.0, 4.0}, DofRange{-1.0, 1.0}, DofRange{-1.0, 1.0}, DofRange{-1.0, 1.0}};
  s.band = {ZeroBand{-0.6, 1.2}, ZeroBand{-0.3, 0.3}, ZeroBand{-0.3, 0.3}, ZeroBand{-0.3, 0.3}};
  const CommandVector c = scale_output({2.0, -5.0, 0.2, 0.31}, s);
  EXPECT_DOUBLE_EQ(c.unbanded[0], 0.5);
  EXPECT_DOUBLE_EQ(c.value[0], 0.5);
  EXPECT_DOUBLE_EQ(c.value[1], -1.0);
  EXPECT_DOUBLE_EQ(c.value[2], 0.0);
  EXPECT_DOUBLE_EQ(c.unbanded[2], 0.2);
  EXPECT_DOUBLE_EQ(c.value[3], 0.31);
  EXPECT_DOUBLE_EQ(scale_output({-1.0, 0, 0, 0}, s).unbanded[0], -0.5);
  EXPECT_DOUBLE_EQ(scale_output({1.2, 0, 0, 0}, s).value[0], 0.0);  // band edge is inside
}

TEST(KinematicCommand, Examples) {
  const OutputScaling k = kinematic_scaling(kGeom);
  ForceFrame home;
  home.force_n = kGeom.pretension();
  EXPECT_EQ(kinematic_command(home, kGeom, k).value, Eigen::Vector4d::Zero());
  const CommandVector edge = kinematic_command(forces_for_pose({2.0, 0.0, 0.0, 0.0}, kGeom), kGeom, k);
  EXPECT_NEAR(edge.value[0], 1.0, 1e-9);
  EXPECT_NEAR(edge.value.tail<3>().norm(), 0.0, 1e-9);
  const CommandVector small = kinematic_command(forces_for_pose({0.3, 0.0, 0.0, 0.0}, kGeom), kGeom, k);
  EXPECT_EQ(small.value[0], 0.0);
  EXPECT_NEAR(small.unbanded[0], 0.15, 1e-9);
  const CommandVector turn = kinematic_command(forces_for_pose(pose_deg(0.0, 0.0, -12.5, 7.0), kGeom), kGeom, k);
  EXPECT_NEAR(turn.value[2], -1.0, 1e-9);
  EXPECT_NEAR(turn.value[3], 0.7, 1e-9);
}

TEST(Align, SingleCandidateKeepsOrFlipsSign) {
  Eigen::MatrixXd data(6, 2);
  data << 1, 0, 2, 0, 1.5, 0, -1, 0, -2, 0, -1.2, 0;
  const std::vector<double> labels = {1, 1, 1, -1, -1, -1};
  Eigen::MatrixXd cand(1, 2);
  cand << 0.5, 0.1;
  AlignResult r = align_component(cand, data, labels);
  EXPECT_EQ(r.component, cand.row(0).transpose());
  cand << -0.5, 0.1;
  r = align_component(cand, data, labels);
  EXPECT_EQ(r.component, (-cand.row(0)).transpose());
  EXPECT_LT(r.correlations[0], 0.0);
  const Eigen::VectorXd act = data * r.component;
  EXPECT_GT(act.head<3>().sum(), 0.0);
  EXPECT_LT(act.tail<3>().sum(), 0.0);
}

TEST(Align, PicksStrongestCorrelation) {
  // Column 0 tracks the labels with r ~ 0.95, column 1 with r ~ 0.3.
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 4000;
  Eigen::MatrixXd data(n, 2);
  std::vector<double> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1.0 : -1.0;
    const double l = labels[static_cast<std::size_t>(i)];
    data(i, 0) = l + 0.329 * g(rng);
    data(i, 1) = l + 3.18 * g(rng);
  }
  const AlignResult r = align_component(Eigen::MatrixXd::Identity(2, 2), data, labels);
  EXPECT_EQ(r.index, 0);
  EXPECT_NEAR(std::abs(r.correlations[0]), 0.95, 0.02);
  EXPECT_NEAR(std::abs(r.correlations[1]), 0.3, 0.03);
  EXPECT_FALSE(r.ambiguous);
}

TEST(Align, NearTieFlaggedAmbiguous) {
  Eigen::MatrixXd data(4, 2);
  data << 1, 1.01, 1, 0.99, -1, -1, -1, -1.0;
  const std::vector<double> labels = {1, 1, -1, -1};
  const AlignResult r = align_component(Eigen::MatrixXd::Identity(2, 2), data, labels);
  EXPECT_TRUE(r.ambiguous);
  EXPECT_EQ(r.index, 0);
}

TEST(Accuracy, SingleDirectionCounting) {
  std::vector<CommandVector> all(50, cmd(0, 0.8, 0, 0));
  EXPECT_DOUBLE_EQ(direction_accuracy(all, Direction::F).ratio(), 1.0);

  std::vector<CommandVector> mixed(80, cmd(0, 0.8, 0, 0));
  mixed.insert(mixed.end(), 20, cmd(0.7, 0.8, 0, 0));
  mixed.insert(mixed.end(), 10, cmd(0, 0, 0, 0));
  const Accuracy a = direction_accuracy(mixed, Direction::F);
  EXPECT_EQ(a.correct, 80u);
  EXPECT_EQ(a.counted, 100u);
  EXPECT_DOUBLE_EQ(a.ratio(), 0.8);

  std::vector<CommandVector> wrong(30, cmd(0, -0.8, 0, 0));
  EXPECT_DOUBLE_EQ(direction_accuracy(wrong, Direction::F).ratio(), 0.0);

  const Accuracy z = direction_accuracy(std::vector<CommandVector>(5, cmd(0, 0, 0, 0)), Direction::F);
  EXPECT_TRUE(z.all_zero);
  EXPECT_EQ(z.ratio(), 0.0);
}

TEST(Accuracy, DiagonalRotation) {
  const double c = std::numbers::sqrt2 / 2.0;
  const std::vector<CommandVector> lf = {cmd(-c, c, 0, 0)};
  const DiagonalFrame f = diagonal_transform(lf, Direction::LF);
  EXPECT_NEAR(f.commands[0].value[0], -1.0, 1e-15);
  EXPECT_NEAR(f.commands[0].value[1], 0.0, 1e-15);
  EXPECT_EQ(f.target, (SignedAxis{Axis::X, -1}));
  EXPECT_DOUBLE_EQ(direction_accuracy(lf, Direction::LF).ratio(), 1.0);

  const Eigen::Vector4d ftu = direction_vector(Direction::FTU);
  EXPECT_DOUBLE_EQ(direction_accuracy(std::vector{cmd(ftu[0], ftu[1], ftu[2], ftu[3])}, Direction::FTU).ratio(), 1.0);

  // Pure F seen as LF leaves c on both axes after rotation.
  EXPECT_DOUBLE_EQ(direction_accuracy(std::vector{cmd(0, 1, 0, 0)}, Direction::LF).ratio(), 0.0);
}

TEST(Accuracy, EveryIdealDiagonalIsCorrect) {
  for (Direction d : kDiagonalDirections) {
    const Eigen::Vector4d v = direction_vector(d);
    // Full-stroke corner command and a yaw excursion that is not counted.
    const std::vector<CommandVector> cmds = {cmd(v[0], v[1], v[2], v[3]),
                                             cmd(v[0] / v.cwiseAbs().maxCoeff(), v[1] / v.cwiseAbs().maxCoeff(), 0.9,
                                                 v[3] / v.cwiseAbs().maxCoeff())};
    EXPECT_DOUBLE_EQ(direction_accuracy(cmds, d).ratio(), 1.0) << to_string(d);
  }
  expect_error(ErrorCode::NotDiagonal, [] { diagonal_transform(std::vector{cmd(0, 1, 0, 0)}, Direction::F); });
}

TEST(Calibration, MissingDirectionNamed) {
  std::vector<TrialRecord> trials = test::single_direction_trials({}, kGeom);
  std::erase_if(trials, [](const TrialRecord& t) { return t.id.direction == Direction::TD; });
  try {
    build_calibration_set(trials, kGeom);
    FAIL() << "expected InvalidArgument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    EXPECT_NE(std::string(e.what()).find("TD"), std::string::npos) << e.what();
  }
}

TEST(FitIca, KnownMixingRowsRecovered) {
  const test::LinearMixture mix = test::make_linear_mixture(5);
  const SubjectModel m = fit_ica(mix.calib);
  const Eigen::Matrix<double, 4, 8> truth = test::true_rows(mix);
  for (int j = 0; j < 4; ++j) {
    EXPECT_GT(test::cosine(m.t.row(j).transpose(), truth.row(j).transpose()), 0.99) << "output " << j;
  }
}

TEST(FitIca, SameSeedBitwiseIdentical) {
  const test::LinearMixture mix = test::make_linear_mixture(6);
  EXPECT_EQ(fit_ica(mix.calib).t, fit_ica(mix.calib).t);
}

TEST(FitIca, TooFewSamples) {
  const test::LinearMixture mix = test::make_linear_mixture(7, 60);
  expect_error(ErrorCode::InvalidArgument, [&] { fit_ica(mix.calib); });
}

TEST(FitIca, IdentitySubjectAgreesWithKinematics) {
  // Noise-free nominal subject: no calibration sample is misclassified by
  // either mapping, and where both leave the dead zone they agree. The linear
  // model may leave the band a frame or two before the kinematic yaw does.
  const SyntheticSubject s{};
  const auto trials = test::single_direction_trials(s, kGeom);
  const SubjectModel model = fit_ica(build_calibration_set(trials, kGeom));
  const OutputScaling ks = kinematic_scaling(kGeom);
  std::size_t both = 0, agree = 0, edge = 0;
  for (const auto& t : trials) {
    std::vector<CommandVector> ica, kin;
    for (const auto& f : filter_frames(t.frames, 9)) {
      ica.push_back(predict_command(model, f, kGeom));
      kin.push_back(kinematic_command(f, kGeom, ks));
    }
    const Accuracy ai = direction_accuracy(ica, t.id.direction);
    const Accuracy ak = direction_accuracy(kin, t.id.direction);
    EXPECT_EQ(ai.correct, ai.counted) << to_string(t.id.direction);
    EXPECT_EQ(ak.correct, ak.counted) << to_string(t.id.direction);
    for (std::size_t i = 0; i < ica.size(); ++i) {
      const bool zi = ica[i].value.isZero(0.0), zk = kin[i].value.isZero(0.0);
      if (zi != zk) ++edge;
      if (zi || zk) continue;
      ++both;
      if (ica[i].value.cwiseSign() == kin[i].value.cwiseSign()) ++agree;
    }
  }
  EXPECT_GT(both, 1000u);
  EXPECT_EQ(agree, both);
  EXPECT_LT(edge, 100u);
}

TEST(FitIca, RotatedSubjectBeatsKinematics) {
  const SyntheticSubject s = rotated_subject(20.0);
  const SubjectModel model = calibrated(s);
  std::vector<TrialRecord> test_trials;
  for (int k = 1; k <= 3; ++k) test_trials.push_back(generate_trial(s, Direction::F, {}, kGeom, 2, k).record);
  const OutputScaling ks = kinematic_scaling(kGeom);
  const double kin = mean_accuracy(test_trials, [&](const ForceFrame& f) { return kinematic_command(f, kGeom, ks); });
  const double ica = mean_accuracy(test_trials, [&](const ForceFrame& f) { return predict_command(model, f, kGeom); });
  EXPECT_LT(kin, 1.0);
  EXPECT_GE(ica, 0.95);
}

TEST(Predict, HomeExtremumAndClamp) {
  const SyntheticSubject s = rotated_subject(15.0);
  const auto trials = test::single_direction_trials(s, kGeom);
  const SubjectModel model = fit_ica(build_calibration_set(trials, kGeom));

  ForceFrame home;
  home.force_n = kGeom.pretension();
  EXPECT_EQ(predict_command(model, home, kGeom).value, Eigen::Vector4d::Zero());

  // The largest y output seen on the modelling data maps to exactly +1.
  const CalibrationSet calib = build_calibration_set(trials, kGeom);
  double best = -1e300;
  ChannelVector arg;
  for (const auto& d : calib.deltas[1]) {
    const double y = model.t.row(1).dot(normalize(d, model.stats)) - model.home_offset[1];
    if (y > best) {
      best = y;
      arg = d;
    }
  }
  ForceFrame ext;
  ext.force_n = kGeom.pretension() + arg;
  EXPECT_NEAR(predict_command(model, ext, kGeom).value[1], 1.0, 1e-12);

  // Five times the extreme force is far outside the modelled range.
  ForceFrame big;
  big.force_n = kGeom.pretension() + 5.0 * arg;
  EXPECT_EQ(predict_command(model, big, kGeom).value[1], 1.0);
}

TEST(ModelFile, RoundtripIsExact) {
  const SubjectModel m = calibrated(rotated_subject(25.0));
  std::stringstream ss;
  write_model(ss, m);
  const std::string text = ss.str();
  const SubjectModel back = read_model(ss);
  EXPECT_EQ(back.subject_id, m.subject_id);
  EXPECT_EQ(back.t, m.t);
  EXPECT_EQ(back.stats.mean, m.stats.mean);
  EXPECT_EQ(back.stats.sigma, m.stats.sigma);
  EXPECT_EQ(back.home_offset, m.home_offset);
  for (int j = 0; j < 4; ++j) {
    EXPECT_EQ(back.scaling.range[j].min, m.scaling.range[j].min);
    EXPECT_EQ(back.scaling.range[j].max, m.scaling.range[j].max);
    EXPECT_EQ(back.scaling.band[j].lo, m.scaling.band[j].lo);
    EXPECT_EQ(back.scaling.band[j].hi, m.scaling.band[j].hi);
  }
  std::stringstream again;
  write_model(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(ModelFile, WrongVersionRejected) {
  std::stringstream ss;
  write_model(ss, calibrated(rotated_subject(10.0)));
  std::string text = ss.str();
  const auto pos = text.find("format_version = 1");
  ASSERT_NE(pos, std::string::npos) << text;
  text.replace(pos, 18, "format_version = 9");
  std::stringstream bad(text);
  expect_error(ErrorCode::ParseError, [&] { read_model(bad); });
}
