#include <benchmark/benchmark.h>

#include "varapprox/flowar.hpp"
#include "varapprox/interp.hpp"
#include "varapprox/nn.hpp"
#include "varapprox/rng.hpp"
#include "varapprox/var_model.hpp"

using namespace varapprox;

static void BM_UpInterpolate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1, "bench/up");
  const TokenMap t = rng.gaussian_map(n, n, 8);
  for (auto _ : state) benchmark::DoNotOptimize(up_interpolate(t, 2 * n, 2 * n));
}
BENCHMARK(BM_UpInterpolate)->Arg(4)->Arg(8)->Arg(16);

static void BM_MaterializeUp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(materialize_up({n, n}, {2 * n, 2 * n}));
}
BENCHMARK(BM_MaterializeUp)->Arg(4)->Arg(8)->Arg(16);

static void BM_Attention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 16;
  Rng rng(2, "bench/attn");
  AttnParams p;
  p.w_q = rng.gaussian_matrix(d, d, 0.25);
  p.w_k = rng.gaussian_matrix(d, d, 0.25);
  p.w_v = rng.gaussian_matrix(d, d, 0.25);
  const Matrix x = rng.gaussian_matrix(n, d);
  for (auto _ : state) benchmark::DoNotOptimize(attention(x, p));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_Attention)->RangeMultiplier(2)->Range(8, 256)->Complexity();

static void BM_VarForward(benchmark::State& state) {
  const auto levels = static_cast<std::size_t>(state.range(0));
  ScaleSchedule s;
  s.d = 8;
  for (std::size_t k = 0; k < levels; ++k) s.levels.push_back({std::size_t{1} << k, std::size_t{1} << k});
  Rng rng(3, "bench/var");
  const VarStackParams p = random_var_stack(s, 8, 16, rng);
  const TokenMap x = rng.gaussian_map(1, 1, 8);
  for (auto _ : state) benchmark::DoNotOptimize(var_forward(x, p));
}
BENCHMARK(BM_VarForward)->DenseRange(2, 5);

static void BM_FlowArInfer(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  Rng rng(4, "bench/flowar");
  const FlowArConfig cfg = random_flowar_config(3, 2, 8, 8, 4, 16, rng);
  const TokenMap z = rng.gaussian_map(2, 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(flowar_infer(cfg, z, 7, steps));
}
BENCHMARK(BM_FlowArInfer)->Arg(1)->Arg(8)->Arg(32);

static void BM_SpectralNorm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5, "bench/spectral");
  const Matrix a = rng.gaussian_matrix(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_norm(a));
}
BENCHMARK(BM_SpectralNorm)->Arg(8)->Arg(32)->Arg(64);

BENCHMARK_MAIN();
