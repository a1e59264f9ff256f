#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace plsim {

/// Byte-pair-encoding vocabulary. Ids 0..255 are raw bytes, followed by the
/// [MASK] and [SEP] specials, followed by one id per learned merge.
class SubwordVocabulary {
 public:
  static constexpr int kMask = 256;
  static constexpr int kSep = 257;
  static constexpr int kFirstMerge = 258;

  SubwordVocabulary();

  /// Learns merges from word frequencies until `target_size` ids exist or no
  /// pair occurs at least twice. Ties go to the pair with the smaller ids.
  static SubwordVocabulary train(const std::map<std::string, std::uint64_t>& word_counts,
                                 std::size_t target_size);

  /// Splits a lexer token into pieces. Whitespace inside the lexeme
  /// separates words and is itself dropped.
  std::vector<int> encode(std::string_view lexeme) const;

  std::size_t size() const { return pieces_.size(); }
  const std::string& piece(int id) const { return pieces_.at(static_cast<std::size_t>(id)); }
  bool is_special(int id) const { return id == kMask || id == kSep; }
  const std::vector<std::pair<int, int>>& merges() const { return merges_; }

  static SubwordVocabulary from_merges(const std::vector<std::pair<int, int>>& merges);

  friend bool operator==(const SubwordVocabulary& a, const SubwordVocabulary& b) {
    return a.merges_ == b.merges_;
  }

 private:
  void add_merge(int left, int right);
  std::vector<int> encode_word(std::string_view word) const;

  std::vector<std::pair<int, int>> merges_;
  std::vector<std::string> pieces_;
  std::unordered_map<std::uint64_t, int> rank_;
};

/// Splits a lexeme at ASCII whitespace.
std::vector<std::string_view> subword_words(std::string_view lexeme);

}  // namespace plsim
