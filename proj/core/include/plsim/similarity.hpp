#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plsim/representation.hpp"

namespace plsim {

/// Cosine of two equal-width nonzero vectors, accumulated in double and
/// clamped to [-1, 1].
double cosine(std::span<const float> u, std::span<const float> v);

/// Maximum cosine between `v` and any vector of `target`.
double directed_token_similarity(std::span<const float> v, const TokenEmbeddingSet& target);

/// Mean over the source vectors of their best match in `target`.
double token_set_similarity(const TokenEmbeddingSet& source, const TokenEmbeddingSet& target);

enum class Kernel {
  Optimized,  // pre-normalized double matrices, blocked products
  Oracle,     // brute force over every vector pair, norms recomputed per pair
  Strict,     // pre-normalized, scalar loops in a fixed summation order
};

struct TokenScore {
  std::string token;
  double score = 0.0;
};

struct LanguageSimilarity {
  double value = 0.0;
  std::vector<TokenScore> per_token;  // ascending token order
  std::size_t shared = 0;
  std::size_t dropped = 0;  // keys present on one side only
};

/// Mean token-set similarity from `a` into `b` over their shared keys.
LanguageSimilarity language_similarity(const LanguageRepresentation& a, const LanguageRepresentation& b,
                                       Kernel kernel = Kernel::Optimized);

struct SimilarityMatrix {
  std::vector<LanguageId> languages;
  std::vector<std::vector<double>> directed;     // [a][b] = sim(a -> b)
  std::vector<std::vector<double>> symmetrized;
  /// Optional [a][b] per-token breakdown of directed cells.
  std::vector<std::vector<std::vector<TokenScore>>> per_token;

  std::size_t size() const { return languages.size(); }
  /// max - min over off-diagonal symmetrized cells; 0 for a single language.
  double spread() const;
};

struct MatrixOptions {
  Kernel kernel = Kernel::Optimized;
  bool per_token = false;
  unsigned threads = 1;
};

SimilarityMatrix pairwise_matrix(std::span<const LanguageRepresentation> reps, const MatrixOptions& options = {});

struct SelfSimilarityDistribution {
  LanguageId language;
  std::map<std::string, double> per_token_scores;
  double mean = 0.0;
  double variance = 0.0;  // population
  std::size_t excluded_singletons = 0;
};

/// Each vector is matched against the other vectors of its own set only.
SelfSimilarityDistribution self_similarity(const LanguageRepresentation& rep, Kernel kernel = Kernel::Optimized);

/// CSV grid with a header row and a header column of language ids.
std::string format_matrix_csv(const std::vector<LanguageId>& languages, const std::vector<std::vector<double>>& grid,
                              int decimals = 12);
struct MatrixCsv {
  std::vector<LanguageId> languages;
  std::vector<std::vector<double>> grid;
};
MatrixCsv parse_matrix_csv(std::string_view text);

/// `token<TAB>lang_a<TAB>lang_b<TAB>score` rows for every directed cell.
std::string format_per_token_tsv(const SimilarityMatrix& matrix, int decimals = 12);

/// Writes directed.csv, symmetrized.csv and, when present, per_token.tsv.
void write_matrix_dir(const SimilarityMatrix& matrix, const std::string& dir);
SimilarityMatrix read_matrix_dir(const std::string& dir);

std::string format_self_similarity(const SelfSimilarityDistribution& dist, int decimals = 12);
SelfSimilarityDistribution parse_self_similarity(std::string_view text);

}  // namespace plsim
