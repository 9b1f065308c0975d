#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "augmotion/attention3d.hpp"
#include "augmotion/harmonize.hpp"
#include "augmotion/heatpose.hpp"
#include "augmotion/kabsch.hpp"
#include "augmotion/synthetic.hpp"

using namespace augmotion;

namespace {

void BM_Kabsch17(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> a(17), b(17);
  for (auto& p : a) p = Vec3(u(rng), u(rng), u(rng));
  for (std::size_t j = 0; j < a.size(); ++j) b[j] = Vec3(-a[j].y(), a[j].x(), a[j].z()) + Vec3(1, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kabsch(a, b));
}
BENCHMARK(BM_Kabsch17);

void BM_HarmonizeSequence(benchmark::State& state) {
  SynthSpec spec;
  spec.frame_count = static_cast<std::size_t>(state.range(0));
  const auto seq = generate_synthetic(spec);
  for (auto _ : state) {
    const auto key = select_key_frame(seq, 0);
    benchmark::DoNotOptimize(harmonize_sequence(seq, key.frame_index));
  }
}
BENCHMARK(BM_HarmonizeSequence)->Arg(64)->Arg(512);

void BM_EncodeFrame(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto seq = generate_synthetic(SynthSpec{});
  const PoseFrame& frame = seq.frames.front();
  const auto vspec = default_volume_spec(std::span<const PoseFrame>(&frame, 1), {n, n, n});
  const double sigma = 1.5 * vspec.voxel_edge().maxCoeff();
  for (auto _ : state) benchmark::DoNotOptimize(encode(frame, seq.topology, vspec, {sigma, 2.0 * sigma}));
}
BENCHMARK(BM_EncodeFrame)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DecodeFrame(benchmark::State& state) {
  const auto seq = generate_synthetic(SynthSpec{});
  const PoseFrame& frame = seq.frames.front();
  const auto vspec = default_volume_spec(std::span<const PoseFrame>(&frame, 1), {64, 64, 64});
  const double sigma = 1.5 * vspec.voxel_edge().maxCoeff();
  const auto vol = encode(frame, seq.topology, vspec, {sigma, 2.0 * sigma});
  for (auto _ : state) benchmark::DoNotOptimize(decode(vol));
}
BENCHMARK(BM_DecodeFrame)->Unit(benchmark::kMillisecond);

void BM_AttentionForward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  TokenGrid grid(side, side, side);
  const auto n = static_cast<Eigen::Index>(grid.size());
  const Eigen::MatrixXd q = Eigen::MatrixXd::Random(n, 32), k = Eigen::MatrixXd::Random(n, 32);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Random(n, 32);
  const auto b = bias_matrix(grid, RelativeBiasTable::random(grid.extents(), 1));
  for (auto _ : state) benchmark::DoNotOptimize(attention_forward(q, k, v, b));
}
BENCHMARK(BM_AttentionForward)->Arg(2)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
