#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plsim/corpus.hpp"

namespace plsim {

/// Surface styles for generated toy languages. Both lex with the builtin
/// "c" spec.
enum class SynthStyle { Curly, List };

SynthStyle parse_synth_style(std::string_view name);

struct SynthLanguageConfig {
  std::string name;
  SynthStyle style = SynthStyle::Curly;
  std::uint64_t grammar_seed = 0;  // keywords, private identifiers, statement mix
  std::uint64_t corpus_seed = 0;   // the files drawn from that grammar
  std::size_t files = 200;
  std::size_t min_statements = 12;
  std::size_t max_statements = 30;
};

/// Identifiers, numbers and punctuation every style draws from. Keywords and
/// other identifiers never overlap between styles.
const std::vector<std::string>& synth_common_inventory();

std::vector<std::string> generate_synthetic_sources(const SynthLanguageConfig& config);

/// In-memory corpus of the generated files under `synth/<name>/NNNN.src`,
/// split by `train_fraction`.
LanguageCorpus synthetic_corpus(const SynthLanguageConfig& config, double train_fraction = 0.9);

/// Writes the generated files into `dir` for use with `plsim ingest`.
void write_synthetic_tree(const SynthLanguageConfig& config, const std::string& dir);

}  // namespace plsim
