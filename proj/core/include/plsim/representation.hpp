#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "plsim/corpus.hpp"

namespace plsim {

/// Contextual vectors for the sampled occurrences of one token in one
/// language, stored row-major.
struct TokenEmbeddingSet {
  std::string token;
  std::size_t dim = 0;
  std::vector<float> values;
  std::vector<std::int64_t> occurrences;  // one id per row

  std::size_t size() const { return occurrences.size(); }
  bool empty() const { return occurrences.empty(); }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

  void add(std::int64_t occurrence, std::span<const float> vec);

  /// Convenience for fixtures: occurrence ids 0..n-1.
  static TokenEmbeddingSet from_rows(std::string token, const std::vector<std::vector<float>>& rows);
};

struct LanguageRepresentation {
  LanguageId language;
  std::string encoder_tag;
  std::size_t dim = 0;
  std::map<std::string, TokenEmbeddingSet> sets;
  std::vector<std::string> dropped;       // common tokens with no usable occurrence
  std::vector<std::string> diagnostics;   // not persisted

  /// Uniform width, non-empty sets, keys matching set tokens.
  void validate() const;
};

}  // namespace plsim
