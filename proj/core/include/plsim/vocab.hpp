#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plsim/corpus.hpp"
#include "plsim/lexer.hpp"

namespace plsim {

/// Token kinds admitted into a vocabulary. Comments are never admitted.
struct KindFilter {
  std::set<TokenKind> kinds{TokenKind::Identifier, TokenKind::Number, TokenKind::String,
                            TokenKind::Operator, TokenKind::Other};

  bool admits(TokenKind kind) const { return kind != TokenKind::Comment && kinds.contains(kind); }
  /// Parses a comma-separated list such as "IDENTIFIER,NUMBER".
  static KindFilter parse(std::string_view list);
};

struct Vocabulary {
  LanguageId language;
  std::map<std::string, std::uint64_t> counts;  // every count >= 1
  std::vector<CorpusDiagnostic> skipped;
};

/// Counts comment-free tokens over every file of the corpus, train and test.
Vocabulary build_vocabulary(const LanguageCorpus& corpus, const LexerSpec& spec,
                            const KindFilter& filter = {});

/// Tokens present in every language. Languages are kept in ascending id
/// order so the result does not depend on input order.
struct CommonVocabulary {
  std::vector<std::string> tokens;        // ascending, unique
  std::vector<LanguageId> languages;      // ascending
  std::vector<std::vector<std::uint64_t>> counts;  // [language][token]

  std::uint64_t count(std::size_t language, std::size_t token) const { return counts[language][token]; }
};

CommonVocabulary intersect(std::span<const Vocabulary> vocabularies);

std::string format_vocabulary(const Vocabulary& vocab);
Vocabulary parse_vocabulary(std::string_view text);

std::string format_common_vocabulary(const CommonVocabulary& common);
CommonVocabulary parse_common_vocabulary(std::string_view text);

}  // namespace plsim
