#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "footif/subject_mapping.hpp"
#include "footif/synthetic_subject.hpp"

namespace footif::test {

/// Three trials per single direction, the calibration layout of one dataset.
inline std::vector<TrialRecord> single_direction_trials(const SyntheticSubject& subject, const DeviceGeometry& geom,
                                                        int dataset = 1, const MotionProfile& profile = {}) {
  std::vector<TrialRecord> out;
  int trial = 0;
  for (Direction d : kSingleDirections) {
    for (int k = 0; k < 3; ++k) out.push_back(generate_trial(subject, d, profile, geom, dataset, ++trial).record);
  }
  return out;
}

/// Noiseless linear mixtures with a known answer. Every axis pair sees two
/// independent sources through its own 8x2 matrix: source 0 is the stroke
/// (positive for the +1-labelled half, negative for the other), source 1 an
/// unrelated uniform signal.
struct LinearMixture {
  CalibrationSet calib;
  std::array<Eigen::Matrix<double, 8, 2>, 4> mixing;
};

inline LinearMixture make_linear_mixture(std::uint64_t seed, int per_label = 300) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LinearMixture m;
  for (int p = 0; p < 4; ++p) {
    for (int i = 0; i < 8; ++i) m.mixing[p].row(i) << g(rng), 0.5 * g(rng);
    for (int sign : {1, -1}) {
      for (int k = 0; k < per_label; ++k) {
        // Stroke bump 0 -> 1 -> 0 over each block of 50 samples.
        const double phase = static_cast<double>(k % 50) / 49.0;
        const double stroke = sign * std::sin(std::numbers::pi * phase);
        const Eigen::Vector2d s(stroke, u(rng));
        m.calib.deltas[p].push_back(m.mixing[p] * s);
        m.calib.labels[p].push_back(sign);
      }
    }
  }
  return m;
}

/// Ground-truth unmixing row for each output, in z-scored channel units:
/// the stroke row of pinv(diag(1/sigma) A_p), sigma from all calibration data.
inline Eigen::Matrix<double, 4, 8> true_rows(const LinearMixture& m) {
  std::vector<ChannelVector> all;
  for (const auto& d : m.calib.deltas) all.insert(all.end(), d.begin(), d.end());
  ChannelVector mean = ChannelVector::Zero();
  for (const auto& v : all) mean += v;
  mean /= static_cast<double>(all.size());
  ChannelVector var = ChannelVector::Zero();
  for (const auto& v : all) var += (v - mean).cwiseAbs2();
  const ChannelVector sigma = (var / static_cast<double>(all.size() - 1)).cwiseSqrt();
  Eigen::Matrix<double, 4, 8> rows;
  for (int p = 0; p < 4; ++p) {
    const Eigen::Matrix<double, 8, 2> an = sigma.cwiseInverse().asDiagonal() * m.mixing[p];
    const Eigen::MatrixXd pinv = an.completeOrthogonalDecomposition().pseudoInverse();
    rows.row(p) = pinv.row(0);
  }
  return rows;
}

inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

}  // namespace footif::test
