#include <random>

#include <benchmark/benchmark.h>

#include "footif/fastica.hpp"
#include "footif/statics.hpp"
#include "footif/synthetic_subject.hpp"

using namespace footif;

namespace {

const DeviceGeometry kGeom = DeviceGeometry::defaults();

void BM_InverseKinematics(benchmark::State& state) {
  const PedalPose p = pose_deg(1.0, -0.5, 5.0, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(inverse_kinematics(p, kGeom));
}
BENCHMARK(BM_InverseKinematics);

void BM_ForwardKinematics(benchmark::State& state) {
  const GuideLengths l = inverse_kinematics(pose_deg(1.0, -0.5, 5.0, 0.0), kGeom);
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics(l, kGeom));
}
BENCHMARK(BM_ForwardKinematics);

void BM_PoseFromForces(benchmark::State& state) {
  const ForceFrame f = forces_for_pose(pose_deg(1.0, -0.5, 5.0, 3.0), kGeom);
  for (auto _ : state) benchmark::DoNotOptimize(pose_from_forces(f, kGeom));
}
BENCHMARK(BM_PoseFromForces);

void BM_EnergyScan(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(energy_scan(kGeom, {n, n, 25}));
}
BENCHMARK(BM_EnergyScan)->Arg(21)->Arg(51)->Unit(benchmark::kMillisecond);

void BM_FastIca(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Eigen::Index n = state.range(0);
  Eigen::MatrixXd s(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) s.row(i) << std::sin(0.05 * static_cast<double>(i)), u(rng);
  Eigen::MatrixXd a(2, 8);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  const Eigen::MatrixXd x = s * a;
  for (auto _ : state) benchmark::DoNotOptimize(fast_ica(x, {}));
}
BENCHMARK(BM_FastIca)->Arg(1000)->Arg(4000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
