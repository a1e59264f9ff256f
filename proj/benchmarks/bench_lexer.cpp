#include <benchmark/benchmark.h>

#include "plsim/lexer.hpp"
#include "plsim/synth.hpp"

using namespace plsim;

namespace {

std::string corpus_text(SynthStyle style) {
  SynthLanguageConfig cfg;
  cfg.name = "bench";
  cfg.style = style;
  cfg.files = 50;
  std::string text;
  for (const auto& s : generate_synthetic_sources(cfg)) text += s;
  return text;
}

void BM_Tokenize(benchmark::State& state, SynthStyle style, const char* spec_name) {
  const std::string text = corpus_text(style);
  const auto& spec = builtin_lexer_spec(spec_name);
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text, spec).tokens.size());
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Tokenize, curly_c, SynthStyle::Curly, "c");
BENCHMARK_CAPTURE(BM_Tokenize, list_lisp, SynthStyle::List, "lisp");
BENCHMARK_CAPTURE(BM_Tokenize, curly_python, SynthStyle::Curly, "python");
