#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "symphony/fastmath.hpp"
#include "symphony/math_core.hpp"
#include "symphony/rng.hpp"

namespace {

void BM_FastSinCos(benchmark::State& state) {
  symphony::Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n), s(n), c(n);
  for (auto& v : x) v = rng.uniform(-40.0, 40.0);
  for (auto _ : state) {
    symphony::fastmath::sincos(x.data(), s.data(), c.data(), n);
    benchmark::DoNotOptimize(s.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FastSinCos)->Arg(1 << 14);

void BM_LibmSinCos(benchmark::State& state) {
  symphony::Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n), s(n), c(n);
  for (auto& v : x) v = rng.uniform(-40.0, 40.0);
  for (auto _ : state) {
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::sin(x[i]);
      c[i] = std::cos(x[i]);
    }
    benchmark::DoNotOptimize(s.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LibmSinCos)->Arg(1 << 14);

void BM_WeightSchedule(benchmark::State& state) {
  for (auto _ : state) {
    symphony::WeightSchedule schedule(static_cast<int>(state.range(0)),
                                      symphony::ScheduleKind::kBuffer);
    benchmark::DoNotOptimize(schedule.weights().data());
  }
}
BENCHMARK(BM_WeightSchedule)->Arg(384)->Arg(512000);

}  // namespace
