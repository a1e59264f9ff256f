#include <benchmark/benchmark.h>

#include <random>

#include "plsim/similarity.hpp"

using namespace plsim;

namespace {

LanguageRepresentation make_rep(const std::string& lang, std::size_t tokens, std::size_t per_token, std::size_t dim,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  LanguageRepresentation rep;
  rep.language = LanguageId(lang);
  rep.dim = dim;
  std::vector<float> v(dim);
  for (std::size_t t = 0; t < tokens; ++t) {
    TokenEmbeddingSet set{"t" + std::to_string(t), dim, {}, {}};
    for (std::size_t i = 0; i < per_token; ++i) {
      for (auto& x : v) x = n(rng);
      set.add(static_cast<std::int64_t>(i), v);
    }
    rep.sets.emplace(set.token, std::move(set));
  }
  return rep;
}

void BM_LanguageSimilarity(benchmark::State& state, Kernel kernel) {
  const auto per_token = static_cast<std::size_t>(state.range(0));
  const auto a = make_rep("a", 20, per_token, 64, 1);
  const auto b = make_rep("b", 20, per_token, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(language_similarity(a, b, kernel).value);
  state.SetItemsProcessed(state.iterations() * 20 * static_cast<std::int64_t>(per_token * per_token));
}

void BM_PairwiseMatrix(benchmark::State& state) {
  std::vector<LanguageRepresentation> reps;
  for (int l = 0; l < state.range(0); ++l) reps.push_back(make_rep("l" + std::to_string(l), 50, 50, 64, l));
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_matrix(reps).spread());
}

void BM_SelfSimilarity(benchmark::State& state) {
  const auto rep = make_rep("a", 20, static_cast<std::size_t>(state.range(0)), 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(self_similarity(rep).mean);
}

}  // namespace

BENCHMARK_CAPTURE(BM_LanguageSimilarity, optimized, Kernel::Optimized)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK_CAPTURE(BM_LanguageSimilarity, strict, Kernel::Strict)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK_CAPTURE(BM_LanguageSimilarity, oracle, Kernel::Oracle)->Arg(10)->Arg(50);
BENCHMARK(BM_PairwiseMatrix)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SelfSimilarity)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
