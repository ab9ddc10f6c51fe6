#include <benchmark/benchmark.h>

#include <random>

#include "splitflow/analysis2link.hpp"
#include "splitflow/equilibria.hpp"
#include "splitflow/stackelberg.hpp"
#include "splitflow/waterfill.hpp"

using namespace splitflow;

namespace {

std::vector<LatencyFn> random_links(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LatencyFn> links;
  for (std::size_t j = 0; j < n; ++j) links.push_back({0.1 + 2 * u(gen), 2 * u(gen)});
  return links;
}

void BM_Fill(benchmark::State& state) {
  const auto links = random_links(static_cast<std::size_t>(state.range(0)), 1);
  const MarginalSpec spec{Mode::optimum, {}, {}};
  std::vector<std::size_t> all(links.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  for (auto _ : state) benchmark::DoNotOptimize(fill(links, spec, 3.0, all));
}
BENCHMARK(BM_Fill)->Arg(2)->Arg(6)->Arg(64)->Arg(1024);

void BM_Nash(benchmark::State& state) {
  const Instance inst = random_instance(42, 7, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nash_solve(inst));
}
BENCHMARK(BM_Nash)->Arg(2)->Arg(6);

void BM_SslExact(benchmark::State& state) {
  const Instance inst = random_instance(42, 11, 6);
  for (auto _ : state) benchmark::DoNotOptimize(ssl_solve(inst, 0, {SslMethod::exact_support, 32, 11, 1e-9}));
}
BENCHMARK(BM_SslExact);

void BM_SslNumeric(benchmark::State& state) {
  const Instance inst = random_instance(42, 11, 6);
  for (auto _ : state) benchmark::DoNotOptimize(ssl_solve(inst, 0, {SslMethod::numeric, 32, 11, 1e-9}));
}
BENCHMARK(BM_SslNumeric)->Unit(benchmark::kMillisecond);

void BM_ClosedFormPrice(benchmark::State& state) {
  const TwoLinkParams p{1, 0, 0, 2, 2.0 / 3.0};
  for (auto _ : state) benchmark::DoNotOptimize(price(p));
}
BENCHMARK(BM_ClosedFormPrice);

}  // namespace

BENCHMARK_MAIN();
