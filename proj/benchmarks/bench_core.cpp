#include <benchmark/benchmark.h>

#include <vector>

#include "canonpose/canonical.hpp"
#include "canonpose/lift.hpp"
#include "canonpose/metrics.hpp"
#include "canonpose/synth.hpp"

using namespace canonpose;

namespace {

const Skeleton& skel() {
  static const Skeleton s = Skeleton::h36m17();
  return s;
}

std::vector<Pose3D> poses(std::size_t n) {
  SynthConfig cfg;
  cfg.n_poses = n;
  return generate_poses(cfg, skel(), 1);
}

void BM_Canonicalize3D(benchmark::State& state) {
  const auto ps = poses(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(canonicalize_3d(ps[i++ % ps.size()], skel()));
  }
}
BENCHMARK(BM_Canonicalize3D);

void BM_Canonicalize2D(benchmark::State& state) {
  const CameraIntrinsics k = default_intrinsics();
  std::vector<Pose2D> obs;
  for (const auto& p : poses(256)) obs.push_back(project(p, k));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(canonicalize_2d(obs[i++ % obs.size()], k, skel()));
  }
}
BENCHMARK(BM_Canonicalize2D);

void BM_Procrustes(benchmark::State& state) {
  const auto ps = poses(257);
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t a = i++ % 256;
    benchmark::DoNotOptimize(procrustes_align(ps[a], ps[a + 1]));
  }
}
BENCHMARK(BM_Procrustes);

void BM_Fit(benchmark::State& state) {
  const CameraIntrinsics k = default_intrinsics();
  std::vector<TrainingPair> pairs;
  for (const auto& p : poses(static_cast<std::size_t>(state.range(0)))) {
    pairs.push_back({screen_normalize(project(p, k), k), root_relative(p, skel())});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(pairs, FitOptions{}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fit)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
