#include "plsim/subword.hpp"

#include <limits>
#include <queue>

#include "plsim/error.hpp"

namespace plsim {

namespace {

constexpr std::size_t kMaxTrainingWordBytes = 64;

std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

}  // namespace

std::vector<std::string_view> subword_words(std::string_view lexeme) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < lexeme.size()) {
    while (i < lexeme.size() && is_ws(lexeme[i])) ++i;
    std::size_t j = i;
    while (j < lexeme.size() && !is_ws(lexeme[j])) ++j;
    if (j > i) words.push_back(lexeme.substr(i, j - i));
    i = j;
  }
  return words;
}

SubwordVocabulary::SubwordVocabulary() {
  pieces_.reserve(kFirstMerge);
  for (int b = 0; b < 256; ++b) pieces_.emplace_back(1, static_cast<char>(b));
  pieces_.emplace_back("[MASK]");
  pieces_.emplace_back("[SEP]");
}

void SubwordVocabulary::add_merge(int left, int right) {
  if (left < 0 || right < 0 || left >= static_cast<int>(size()) || right >= static_cast<int>(size()) ||
      is_special(left) || is_special(right)) {
    throw EncoderError("invalid subword merge");
  }
  rank_.emplace(pair_key(left, right), static_cast<int>(merges_.size()));
  merges_.emplace_back(left, right);
  pieces_.push_back(pieces_[static_cast<std::size_t>(left)] + pieces_[static_cast<std::size_t>(right)]);
}

SubwordVocabulary SubwordVocabulary::from_merges(const std::vector<std::pair<int, int>>& merges) {
  SubwordVocabulary v;
  for (const auto& [a, b] : merges) v.add_merge(a, b);
  return v;
}

SubwordVocabulary SubwordVocabulary::train(const std::map<std::string, std::uint64_t>& word_counts,
                                           std::size_t target_size) {
  SubwordVocabulary vocab;
  struct Word {
    std::vector<int> symbols;
    std::int64_t count;
  };
  std::vector<Word> words;
  for (const auto& [word, count] : word_counts) {
    if (word.empty() || word.size() > kMaxTrainingWordBytes) continue;
    Word w{{}, static_cast<std::int64_t>(count)};
    for (char c : word) w.symbols.push_back(static_cast<unsigned char>(c));
    words.push_back(std::move(w));
  }

  std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> where;
  for (std::uint32_t w = 0; w < words.size(); ++w) {
    const auto& s = words[w].symbols;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const auto key = pair_key(s[i], s[i + 1]);
      pair_counts[key] += words[w].count;
      where[key].push_back(w);
    }
  }

  // Max-heap on count; among equal counts the smaller key wins.
  using Entry = std::pair<std::int64_t, std::uint64_t>;
  auto cmp = [](const Entry& a, const Entry& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  for (const auto& [key, count] : pair_counts) heap.emplace(count, key);

  std::vector<std::uint32_t> visited(words.size(), std::numeric_limits<std::uint32_t>::max());
  while (vocab.size() < target_size && !heap.empty()) {
    const auto [count, key] = heap.top();
    heap.pop();
    const auto it = pair_counts.find(key);
    if (it == pair_counts.end() || it->second != count) continue;  // stale entry
    if (count < 2) break;
    const int left = static_cast<int>(key >> 32);
    const int right = static_cast<int>(key & 0xffffffffu);
    const int merged = static_cast<int>(vocab.size());
    const auto stamp = static_cast<std::uint32_t>(vocab.merges_.size());
    vocab.add_merge(left, right);

    std::vector<std::uint64_t> touched;
    const auto occurrences = where[key];
    for (const std::uint32_t w : occurrences) {
      if (visited[w] == stamp) continue;
      visited[w] = stamp;
      auto& word = words[w];
      auto& s = word.symbols;
      bool contains = false;
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] == left && s[i + 1] == right) {
          contains = true;
          break;
        }
      }
      if (!contains) continue;
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const auto k = pair_key(s[i], s[i + 1]);
        pair_counts[k] -= word.count;
        touched.push_back(k);
      }
      std::vector<int> next;
      next.reserve(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i] == left && s[i + 1] == right) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(s[i]);
        }
      }
      s = std::move(next);
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const auto k = pair_key(s[i], s[i + 1]);
        pair_counts[k] += word.count;
        where[k].push_back(w);
        touched.push_back(k);
      }
    }
    for (const auto k : touched) {
      const auto c = pair_counts[k];
      if (c > 0) heap.emplace(c, k);
    }
  }
  return vocab;
}

std::vector<int> SubwordVocabulary::encode_word(std::string_view word) const {
  std::vector<int> s;
  s.reserve(word.size());
  for (char c : word) s.push_back(static_cast<unsigned char>(c));
  while (s.size() > 1) {
    int best_rank = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const auto it = rank_.find(pair_key(s[i], s[i + 1]));
      if (it != rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == std::numeric_limits<int>::max()) break;
    const auto [left, right] = merges_[static_cast<std::size_t>(best_rank)];
    const int merged = kFirstMerge + best_rank;
    std::vector<int> next;
    next.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i + 1 < s.size() && s[i] == left && s[i + 1] == right) {
        next.push_back(merged);
        ++i;
      } else {
        next.push_back(s[i]);
      }
    }
    s = std::move(next);
  }
  return s;
}

std::vector<int> SubwordVocabulary::encode(std::string_view lexeme) const {
  std::vector<int> ids;
  for (auto word : subword_words(lexeme)) {
    const auto pieces = encode_word(word);
    ids.insert(ids.end(), pieces.begin(), pieces.end());
  }
  return ids;
}

}  // namespace plsim
