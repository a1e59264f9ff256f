#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "plsim/encoder.hpp"
#include "plsim/report.hpp"
#include "plsim/similarity.hpp"
#include "plsim/vocab.hpp"

namespace plsim {

struct PipelineInput {
  LanguageId language;
  std::string lexer;   // builtin spec name or spec file
  std::string source;  // directory to scan, or a manifest file
};

struct PipelineConfig {
  std::vector<PipelineInput> inputs;
  std::optional<std::size_t> max_files;
  double train_fraction = 0.9;
  EncoderConfig encoder;
  std::size_t samples = 50;
  std::uint64_t seed = 0;  // occurrence sampling
  EmbedOptions embed;
  bool strict_fp = false;
  unsigned threads = 1;
  ReportConfig report;
  std::string out_dir;
};

struct PipelineResult {
  CommonVocabulary common;
  SimilarityMatrix matrix;
  std::vector<SelfSimilarityDistribution> self;
};

/// ingest, split, lex, vocabulary, intersection, training, embedding,
/// similarity and report for every input. Per-language artifacts land in
/// `<out>/<language>/`, the matrix in `<out>/matrix/` and the rendered
/// report in `<out>/report/`.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

}  // namespace plsim
