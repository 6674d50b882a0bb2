#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "orthant/constants.hpp"
#include "orthant/critical.hpp"
#include "orthant/fbm.hpp"
#include "orthant/normal.hpp"
#include "orthant/qp.hpp"
#include "orthant/scenarios.hpp"

namespace {

using namespace orthant;

Eigen::MatrixXd spd(int d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = z(gen);
  }
  return a * a.transpose() / d + 0.2 * Eigen::MatrixXd::Identity(d, d);
}

void BM_FbmPair(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  FbmSampler sampler(0.3, n, 1.0 / static_cast<double>(n));
  auto work = sampler.make_workspace();
  std::vector<double> a(n), b(n);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    RandomStream rng(1, stream++);
    sampler.sample_pair(rng, a, b, work);
    benchmark::DoNotOptimize(a.data());
    benchmark::DoNotOptimize(b.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_FbmPair)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

void BM_SolveQp(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Eigen::MatrixXd s = spd(d, 7);
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(d, -1.0, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(s, b).value);
}
BENCHMARK(BM_SolveQp)->DenseRange(2, 10, 2);

void BM_FindT0(benchmark::State& state) {
  const ModelSpec m = example_four_dim(0.75);
  for (auto _ : state) benchmark::DoNotOptimize(find_t0(m).t0);
}
BENCHMARK(BM_FindT0);

void BM_MvnCdf(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const Eigen::MatrixXd s = spd(k, 11);
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(k, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(mvn_cdf(s, a).value);
}
BENCHMARK(BM_MvnCdf)->DenseRange(1, 4);

void BM_CK(benchmark::State& state) {
  const ModelSpec m = example_four_dim(0.75);
  const CriticalPoint cp = find_t0(m);
  for (auto _ : state) benchmark::DoNotOptimize(c_K(m, cp).value);
}
BENCHMARK(BM_CK);

}  // namespace
BENCHMARK_MAIN();
