#include "plsim/vocab.hpp"

#include <algorithm>
#include <charconv>

#include "plsim/error.hpp"
#include "plsim/text.hpp"

namespace plsim {

KindFilter KindFilter::parse(std::string_view list) {
  KindFilter filter;
  filter.kinds.clear();
  for (auto part : split(list, ',')) {
    if (part.empty()) continue;
    const TokenKind kind = parse_token_kind(part);
    if (kind == TokenKind::Comment) throw VocabError("comments cannot be admitted into a vocabulary");
    filter.kinds.insert(kind);
  }
  if (filter.kinds.empty()) throw VocabError("empty kind filter");
  return filter;
}

Vocabulary build_vocabulary(const LanguageCorpus& corpus, const LexerSpec& spec, const KindFilter& filter) {
  Vocabulary vocab;
  vocab.language = corpus.language();
  for (const auto& file : corpus.files()) {
    LexResult lexed;
    try {
      lexed = tokenize(file.text, spec);
    } catch (const LexError& e) {
      vocab.skipped.push_back({file.path, e.what()});
      continue;
    }
    for (const auto& tok : lexed.tokens) {
      if (filter.admits(tok.kind)) ++vocab.counts[vocabulary_key(tok, spec)];
    }
  }
  return vocab;
}

CommonVocabulary intersect(std::span<const Vocabulary> vocabularies) {
  if (vocabularies.size() < 2) throw VocabError("intersect needs at least two vocabularies");
  std::vector<const Vocabulary*> ordered;
  for (const auto& v : vocabularies) ordered.push_back(&v);
  std::sort(ordered.begin(), ordered.end(),
            [](const Vocabulary* a, const Vocabulary* b) { return a->language < b->language; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->language == ordered[i - 1]->language) {
      throw VocabError("duplicate language in intersect: " + ordered[i]->language.str());
    }
  }
  // Walk the smallest vocabulary; map iteration is already ascending.
  const Vocabulary* smallest = *std::min_element(
      ordered.begin(), ordered.end(),
      [](const Vocabulary* a, const Vocabulary* b) { return a->counts.size() < b->counts.size(); });

  CommonVocabulary common;
  for (const auto* v : ordered) common.languages.push_back(v->language);
  common.counts.resize(ordered.size());
  for (const auto& [token, count] : smallest->counts) {
    bool everywhere = true;
    for (const auto* v : ordered) {
      if (!v->counts.contains(token)) {
        everywhere = false;
        break;
      }
    }
    if (!everywhere) continue;
    common.tokens.push_back(token);
    for (std::size_t l = 0; l < ordered.size(); ++l) common.counts[l].push_back(ordered[l]->counts.at(token));
  }
  return common;
}

namespace {

std::uint64_t parse_count(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw FormatError("bad token count: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string format_vocabulary(const Vocabulary& vocab) {
  std::string out = "#plsim-vocab v1 language=" + vocab.language.str() + "\n";
  for (const auto& [token, count] : vocab.counts) {
    out += std::to_string(count) + "\t" + escape_field(token) + "\n";
  }
  return out;
}

Vocabulary parse_vocabulary(std::string_view text) {
  const auto lines = split_lines(text);
  const std::string_view magic = "#plsim-vocab v1 language=";
  if (lines.empty() || !lines[0].starts_with(magic)) throw FormatError("not a plsim vocabulary file");
  Vocabulary vocab;
  vocab.language = LanguageId(std::string(lines[0].substr(magic.size())));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto tab = lines[i].find('\t');
    if (tab == std::string_view::npos) throw FormatError("vocabulary line " + std::to_string(i + 1) + ": missing tab");
    const auto [it, inserted] =
        vocab.counts.emplace(unescape_field(lines[i].substr(tab + 1)), parse_count(lines[i].substr(0, tab)));
    if (!inserted) throw FormatError("duplicate token in vocabulary: " + it->first);
  }
  return vocab;
}

std::string format_common_vocabulary(const CommonVocabulary& common) {
  std::string out = "#plsim-common v1 languages=" + std::to_string(common.languages.size()) +
                    " tokens=" + std::to_string(common.tokens.size()) + "\n";
  for (const auto& l : common.languages) out += l.str() + "\t";
  out += "token\n";
  for (std::size_t t = 0; t < common.tokens.size(); ++t) {
    for (std::size_t l = 0; l < common.languages.size(); ++l) out += std::to_string(common.counts[l][t]) + "\t";
    out += escape_field(common.tokens[t]) + "\n";
  }
  return out;
}

CommonVocabulary parse_common_vocabulary(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.size() < 2 || !lines[0].starts_with("#plsim-common v1")) {
    throw FormatError("not a plsim common vocabulary file");
  }
  CommonVocabulary common;
  const auto header = split(lines[1], '\t');
  if (header.empty() || header.back() != "token") throw FormatError("common vocabulary header row must end with 'token'");
  for (std::size_t i = 0; i + 1 < header.size(); ++i) common.languages.emplace_back(std::string(header[i]));
  common.counts.resize(common.languages.size());
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    if (cols.size() != header.size()) throw FormatError("common vocabulary line " + std::to_string(i + 1) + ": column count");
    for (std::size_t l = 0; l < common.languages.size(); ++l) common.counts[l].push_back(parse_count(cols[l]));
    common.tokens.push_back(unescape_field(cols.back()));
  }
  if (!std::is_sorted(common.tokens.begin(), common.tokens.end()) ||
      std::adjacent_find(common.tokens.begin(), common.tokens.end()) != common.tokens.end()) {
    throw FormatError("common vocabulary tokens must be sorted and unique");
  }
  return common;
}

}  // namespace plsim
