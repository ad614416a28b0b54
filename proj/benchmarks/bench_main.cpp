#include <benchmark/benchmark.h>

#include <vector>

#include "smallball/coord_smallball.hpp"
#include "smallball/grassmann.hpp"
#include "smallball/operator.hpp"
#include "smallball/smallball_engine.hpp"
#include "smallball/subsampled_conv.hpp"

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  sblab::TrialRng rng(seed, sblab::Stream::kTest, 0);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

void BM_ConvolveFft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 1);
  const auto x = noise(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sblab::circular_convolve(a, x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvolveFft)->RangeMultiplier(4)->Range(64, 1 << 16)->Complexity();

void BM_ConvolveDirect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 1);
  const auto x = noise(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sblab::circular_convolve_direct(a, x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvolveDirect)->RangeMultiplier(4)->Range(64, 1 << 12)->Complexity();

void BM_CirculantApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const sblab::CirculantOperator op(noise(n, 3));
  const auto x = noise(n, 4);
  std::vector<double> out(n);
  sblab::ComplexVector scratch;
  for (auto _ : state) {
    op.apply(x, out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_CirculantApply)->Arg(256)->Arg(4096)->Arg(1 << 16);

void BM_SingularValues(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd a = sblab::Operator::gaussian(n, n, 5).entries();
  for (auto _ : state) benchmark::DoNotOptimize(sblab::singular_values(a));
}
BENCHMARK(BM_SingularValues)->Arg(8)->Arg(64)->Arg(256);

void BM_RestrictedInvertibility(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd a = sblab::Operator::gaussian(n, n, 6).entries();
  const auto target = static_cast<std::size_t>(n / 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sblab::restricted_invertibility_select(a, target, sblab::kInf));
  }
}
BENCHMARK(BM_RestrictedInvertibility)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_AkEstimate(benchmark::State& state) {
  const sblab::Operator t = sblab::Operator::gaussian(8, 8, 7);
  sblab::MonteCarlo mc;
  mc.trials = 10000;
  mc.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sblab::a_k_estimate(t, static_cast<int>(state.range(0)), mc));
}
BENCHMARK(BM_AkEstimate)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SmallballSweep(benchmark::State& state) {
  const auto m = static_cast<int>(state.range(0));
  const sblab::Operator t = sblab::Operator::identity(m);
  const auto model = sblab::RandomVectorModel::gaussian(m);
  const std::vector<double> eps{0.05, 0.1, 0.2};
  sblab::MonteCarlo mc;
  mc.trials = 100000;
  mc.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sblab::smallball_sweep(model, t, eps, mc));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mc.trials));
}
BENCHMARK(BM_SmallballSweep)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
