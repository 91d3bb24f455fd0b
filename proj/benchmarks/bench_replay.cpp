#include <benchmark/benchmark.h>

#include "symphony/replay.hpp"

namespace {

using symphony::FadingReplayBuffer;
using symphony::Rng;
using symphony::ScheduleKind;
using symphony::Transition;
using symphony::WeightSchedule;

FadingReplayBuffer make_buffer(int capacity, symphony::Precision precision) {
  std::vector<Transition> exploration;
  Rng rng(5);
  for (int i = 0; i < capacity / 8; ++i) {
    Transition t;
    t.state = Eigen::VectorXd::Constant(3, rng.uniform());
    t.action = Eigen::VectorXd::Constant(1, rng.uniform(-1.0, 1.0));
    t.reward_norm = rng.uniform(-1.0, 1.0);
    t.done = 0.0;
    t.next_state = Eigen::VectorXd::Constant(3, rng.uniform());
    exploration.push_back(std::move(t));
  }
  FadingReplayBuffer::Options options;
  options.precision = precision;
  return FadingReplayBuffer::prefill(exploration, 8, options,
                                     WeightSchedule(capacity, ScheduleKind::kBuffer));
}

void BM_Push(benchmark::State& state) {
  auto buffer = make_buffer(1 << 16, symphony::Precision::kFull);
  Rng rng(6);
  Transition t;
  t.state = Eigen::VectorXd::Zero(3);
  t.action = Eigen::VectorXd::Zero(1);
  t.next_state = Eigen::VectorXd::Zero(3);
  for (auto _ : state) {
    t.reward_norm = rng.uniform();
    buffer.push(t);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Push);

void BM_Sample(benchmark::State& state) {
  auto buffer = make_buffer(1 << 16, symphony::Precision::kFull);
  Rng rng(7);
  for (auto _ : state) {
    auto batch = buffer.sample(static_cast<int>(state.range(0)), rng);
    benchmark::DoNotOptimize(batch.states.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sample)->Arg(96)->Arg(384);

void BM_SampleHalf(benchmark::State& state) {
  auto buffer = make_buffer(1 << 16, symphony::Precision::kHalf);
  Rng rng(8);
  for (auto _ : state) {
    auto batch = buffer.sample(384, rng);
    benchmark::DoNotOptimize(batch.states.data());
  }
  state.SetItemsProcessed(state.iterations() * 384);
}
BENCHMARK(BM_SampleHalf);

}  // namespace
