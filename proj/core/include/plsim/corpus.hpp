#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plsim/lexer.hpp"

namespace plsim {

/// Lowercase language identifier, validated on construction.
class LanguageId {
 public:
  LanguageId() = default;
  explicit LanguageId(std::string name);

  const std::string& str() const { return name_; }

  friend auto operator<=>(const LanguageId&, const LanguageId&) = default;

 private:
  std::string name_;
};

enum class Partition { Train, Test };

struct ManifestEntry {
  std::string path;
  std::uint64_t byte_length = 0;
};

struct CorpusManifest {
  LanguageId language;
  std::vector<ManifestEntry> files;       // canonical order
  std::optional<std::size_t> max_files;   // nullopt = unlimited
};

/// Builds a manifest from every regular file under `root`, sorted
/// lexicographically by full path.
CorpusManifest scan_directory(const LanguageId& language, const std::string& root,
                              std::optional<std::size_t> max_files = std::nullopt);

/// `#plsim-manifest v1 language=<id> max_files=<n|inf>` followed by
/// `path<TAB>byte_length` records.
std::string format_manifest(const CorpusManifest& manifest);
CorpusManifest parse_manifest(std::string_view text);

struct SourceFile {
  std::string path;
  std::string text;  // valid UTF-8
  Partition partition = Partition::Train;
};

struct CorpusDiagnostic {
  std::string path;
  std::string message;
};

class LanguageCorpus {
 public:
  LanguageCorpus() = default;
  LanguageCorpus(LanguageId language, std::vector<SourceFile> files,
                 std::vector<CorpusDiagnostic> diagnostics = {});

  const LanguageId& language() const { return language_; }
  const std::vector<SourceFile>& files() const { return files_; }
  const std::vector<CorpusDiagnostic>& diagnostics() const { return diagnostics_; }
  std::size_t size() const { return files_.size(); }
  bool empty() const { return files_.empty(); }

  std::size_t train_count() const;
  std::size_t test_count() const { return size() - train_count(); }

  /// Copy with the given partition tags; tags.size() must equal size().
  LanguageCorpus with_partition(const std::vector<Partition>& tags) const;

 private:
  LanguageId language_;
  std::vector<SourceFile> files_;
  std::vector<CorpusDiagnostic> diagnostics_;
};

/// Reads the manifest's files in order, truncated to max_files. Undecodable
/// bytes become U+FFFD with a per-file diagnostic. Every file is tagged TRAIN.
LanguageCorpus ingest(const CorpusManifest& manifest);

/// First floor(n * train_fraction) files become TRAIN, the rest TEST.
LanguageCorpus split(const LanguageCorpus& corpus, double train_fraction);

struct CorpusStats {
  LanguageId language;
  std::size_t file_count = 0;
  std::uint64_t token_count = 0;          // comments included
  std::uint64_t comment_token_count = 0;
  std::vector<CorpusDiagnostic> skipped;  // files that failed to lex
};

CorpusStats compute_stats(const LanguageCorpus& corpus, const LexerSpec& spec);

/// On-disk corpus directory: `corpus.tsv` index plus one decoded text file
/// per source under `files/`.
void save_corpus(const LanguageCorpus& corpus, const std::string& dir);
LanguageCorpus load_corpus(const std::string& dir);

}  // namespace plsim
