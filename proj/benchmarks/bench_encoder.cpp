#include <benchmark/benchmark.h>

#include <random>

#include "plsim/transformer.hpp"

using namespace plsim;

namespace {

nn::Transformer<float> make_model(int dim, int layers) {
  nn::TransformerShape shape{1024, dim, layers, 4, 4 * dim, 64};
  nn::Transformer<float> model(shape);
  std::vector<std::string> pieces;
  for (int i = 0; i < shape.vocab; ++i) pieces.push_back("p" + std::to_string(i));
  model.initialize(1, pieces);
  return model;
}

nn::MlmBatch make_batch(int batch, int length) {
  std::mt19937_64 rng(2);
  nn::MlmBatch b{batch, length, {}, {}, {}};
  for (int i = 0; i < batch * length; ++i) b.inputs.push_back(static_cast<int>(rng() % 1024));
  for (int i = 0; i < batch * length; i += 7) {
    b.target_rows.push_back(i);
    b.target_ids.push_back(b.inputs[static_cast<std::size_t>(i)]);
  }
  return b;
}

void BM_TrainStep(benchmark::State& state) {
  auto model = make_model(static_cast<int>(state.range(0)), 2);
  const auto batch = make_batch(8, 64);
  nn::AdamW<float> opt(model.parameters().size(), nn::matrix_mask(model));
  nn::ParamVector<float> grad(model.parameters().size());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0f);
    benchmark::DoNotOptimize(model.mlm_loss(batch, &grad));
    opt.step(model.parameters(), grad, 1e-3);
  }
}

void BM_HiddenStates(benchmark::State& state) {
  const auto model = make_model(64, 2);
  const auto batch = make_batch(1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(model.hidden_states(batch.inputs, 2).sum());
}

}  // namespace

BENCHMARK(BM_TrainStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HiddenStates)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);
