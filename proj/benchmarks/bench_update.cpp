#include <benchmark/benchmark.h>

#include "symphony/config.hpp"
#include "symphony/trainer.hpp"

namespace {

using symphony::RunConfig;
using symphony::Trainer;
using symphony::Variant;
using symphony::VariantConfig;

RunConfig desk_config() {
  RunConfig config;
  config.algo = VariantConfig::preset(Variant::kS3);
  config.algo.n_exp = 256;
  config.algo.repeats = 8;
  config.algo.h_dim = 128;
  config.algo.n_out = 32;
  config.env_name = "pendulum";
  config.seed = 42;
  config.total_steps = 0;  // explore() uses n_exp when unset
  return config;
}

// One full joint update (forward, single backward, optimizer, polyak) at the
// desk smoke-test scale: B = 96, h_dim = 128, 3 x 32 critic nodes.
void BM_UpdateOnceDesk(benchmark::State& state) {
  Trainer trainer(desk_config());
  trainer.explore();
  auto batch = trainer.buffer()->sample(trainer.config().algo.batch(),
                                        trainer.noise_rng());
  for (auto _ : state) {
    benchmark::DoNotOptimize(trainer.update_once(batch));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_UpdateOnceDesk)->Unit(benchmark::kMillisecond);

// Full-size configuration (h_dim = 512, B = 384) for throughput planning.
void BM_UpdateOnceFull(benchmark::State& state) {
  RunConfig config = desk_config();
  config.algo.h_dim = 512;
  config.algo.n_out = 128;
  Trainer trainer(config);
  trainer.explore();
  auto batch = trainer.buffer()->sample(trainer.config().algo.batch(),
                                        trainer.noise_rng());
  for (auto _ : state) {
    benchmark::DoNotOptimize(trainer.update_once(batch));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_UpdateOnceFull)->Unit(benchmark::kMillisecond);

void BM_TrainStepDesk(benchmark::State& state) {
  Trainer trainer(desk_config());
  trainer.explore();
  for (auto _ : state) {
    trainer.train_step();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TrainStepDesk)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
