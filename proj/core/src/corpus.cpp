#include "plsim/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "plsim/error.hpp"
#include "plsim/text.hpp"

namespace fs = std::filesystem;

namespace plsim {

LanguageId::LanguageId(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw CorpusError("language id must be non-empty");
  for (char c : name_) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
                    c == '+' || c == '.';
    if (!ok) throw CorpusError("language id must be lowercase: " + name_);
  }
}

namespace {

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("bad " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

void expect_header(std::string_view line, std::string_view magic) {
  if (!line.starts_with(magic)) {
    throw FormatError("expected header '" + std::string(magic) + "', got: " + std::string(line));
  }
}

}  // namespace

CorpusManifest scan_directory(const LanguageId& language, const std::string& root,
                              std::optional<std::size_t> max_files) {
  if (!fs::is_directory(root)) throw CorpusError("not a directory: " + root);
  CorpusManifest manifest{language, {}, max_files};
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      manifest.files.push_back({entry.path().string(), static_cast<std::uint64_t>(entry.file_size())});
    }
  }
  std::sort(manifest.files.begin(), manifest.files.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  return manifest;
}

std::string format_manifest(const CorpusManifest& manifest) {
  std::string out = "#plsim-manifest v1 language=" + manifest.language.str() + " max_files=" +
                    (manifest.max_files ? std::to_string(*manifest.max_files) : std::string("inf")) +
                    "\n";
  for (const auto& f : manifest.files) {
    out += escape_field(f.path) + "\t" + std::to_string(f.byte_length) + "\n";
  }
  return out;
}

CorpusManifest parse_manifest(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw FormatError("empty manifest");
  expect_header(lines[0], "#plsim-manifest v1");
  CorpusManifest manifest;
  manifest.language = LanguageId(header_attribute(lines[0], "language"));
  const auto cap = header_attribute(lines[0], "max_files");
  if (cap != "inf") manifest.max_files = parse_u64(cap, "max_files");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 2) throw FormatError("manifest line " + std::to_string(i + 1) + ": expected 2 columns");
    manifest.files.push_back({unescape_field(cols[0]), parse_u64(cols[1], "byte_length")});
  }
  return manifest;
}

LanguageCorpus::LanguageCorpus(LanguageId language, std::vector<SourceFile> files,
                               std::vector<CorpusDiagnostic> diagnostics)
    : language_(std::move(language)), files_(std::move(files)), diagnostics_(std::move(diagnostics)) {
  bool seen_test = false;
  for (const auto& f : files_) {
    if (f.partition == Partition::Test) seen_test = true;
    else if (seen_test) throw CorpusError("TRAIN file after TEST file: " + f.path);
  }
}

std::size_t LanguageCorpus::train_count() const {
  return static_cast<std::size_t>(std::count_if(
      files_.begin(), files_.end(), [](const SourceFile& f) { return f.partition == Partition::Train; }));
}

LanguageCorpus LanguageCorpus::with_partition(const std::vector<Partition>& tags) const {
  if (tags.size() != files_.size()) throw CorpusError("partition size mismatch");
  auto files = files_;
  for (std::size_t i = 0; i < files.size(); ++i) files[i].partition = tags[i];
  return LanguageCorpus(language_, std::move(files), diagnostics_);
}

LanguageCorpus ingest(const CorpusManifest& manifest) {
  if (manifest.files.empty()) throw CorpusError("empty manifest for language " + manifest.language.str());
  if (manifest.max_files && *manifest.max_files == 0) throw CorpusError("max_files must be positive");
  std::vector<std::string> seen;
  const std::size_t n = std::min(manifest.files.size(), manifest.max_files.value_or(manifest.files.size()));
  std::vector<SourceFile> files;
  std::vector<CorpusDiagnostic> diags;
  files.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entry = manifest.files[i];
    seen.push_back(entry.path);
    if (!fs::is_regular_file(entry.path)) throw CorpusError("missing corpus file: " + entry.path);
    const std::string bytes = read_file(entry.path);
    std::size_t replaced = 0;
    std::string text = decode_utf8_lossy(bytes, &replaced);
    if (replaced > 0) {
      diags.push_back({entry.path, std::to_string(replaced) + " undecodable byte(s) replaced with U+FFFD"});
    }
    if (entry.byte_length != 0 && entry.byte_length != bytes.size()) {
      diags.push_back({entry.path, "size " + std::to_string(bytes.size()) + " differs from manifest " +
                                       std::to_string(entry.byte_length)});
    }
    files.push_back({entry.path, std::move(text), Partition::Train});
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw CorpusError("duplicate path in manifest: " + *std::adjacent_find(seen.begin(), seen.end()));
  }
  return LanguageCorpus(manifest.language, std::move(files), std::move(diags));
}

LanguageCorpus split(const LanguageCorpus& corpus, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw CorpusError("train_fraction must lie in (0, 1]");
  }
  if (corpus.empty()) throw CorpusError("cannot split an empty corpus");
  const std::size_t n = corpus.size();
  auto train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 1e-9));
  train = std::min(train, n);
  std::vector<Partition> tags(n, Partition::Test);
  std::fill_n(tags.begin(), train, Partition::Train);
  return corpus.with_partition(tags);
}

CorpusStats compute_stats(const LanguageCorpus& corpus, const LexerSpec& spec) {
  CorpusStats stats;
  stats.language = corpus.language();
  for (const auto& file : corpus.files()) {
    try {
      const auto result = tokenize(file.text, spec);
      ++stats.file_count;
      stats.token_count += result.tokens.size();
      stats.comment_token_count += static_cast<std::uint64_t>(
          std::count_if(result.tokens.begin(), result.tokens.end(),
                        [](const Token& t) { return t.kind == TokenKind::Comment; }));
    } catch (const LexError& e) {
      stats.skipped.push_back({file.path, e.what()});
    }
  }
  return stats;
}

void save_corpus(const LanguageCorpus& corpus, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "files");
  std::string index = "#plsim-corpus v1 language=" + corpus.language().str() +
                      " files=" + std::to_string(corpus.size()) +
                      " train=" + std::to_string(corpus.train_count()) + "\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& f = corpus.files()[i];
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.txt", i);
    write_file((fs::path(dir) / "files" / name).string(), f.text);
    index += std::to_string(i) + "\t" + (f.partition == Partition::Train ? "TRAIN" : "TEST") + "\t" +
             escape_field(f.path) + "\t" + name + "\n";
  }
  write_file((fs::path(dir) / "corpus.tsv").string(), index);
  std::string diag;
  for (const auto& d : corpus.diagnostics()) diag += escape_field(d.path) + "\t" + escape_field(d.message) + "\n";
  write_file((fs::path(dir) / "diagnostics.tsv").string(), diag);
}

LanguageCorpus load_corpus(const std::string& dir) {
  const auto index_path = (fs::path(dir) / "corpus.tsv").string();
  if (!fs::is_regular_file(index_path)) throw CorpusError("not a corpus directory (no corpus.tsv): " + dir);
  const std::string index = read_file(index_path);
  const auto lines = split_lines(index);
  if (lines.empty()) throw FormatError("empty corpus index: " + index_path);
  expect_header(lines[0], "#plsim-corpus v1");
  LanguageId language(header_attribute(lines[0], "language"));
  std::vector<SourceFile> files;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 4) throw FormatError("corpus index line " + std::to_string(i + 1) + ": expected 4 columns");
    Partition part;
    if (cols[1] == "TRAIN") part = Partition::Train;
    else if (cols[1] == "TEST") part = Partition::Test;
    else throw FormatError("bad partition tag: " + std::string(cols[1]));
    files.push_back({unescape_field(cols[2]), read_file((fs::path(dir) / "files" / std::string(cols[3])).string()), part});
  }
  std::vector<CorpusDiagnostic> diags;
  const auto diag_path = fs::path(dir) / "diagnostics.tsv";
  if (fs::is_regular_file(diag_path)) {
    for (auto line : split_lines(read_file(diag_path.string()))) {
      const auto cols = split(line, '\t');
      if (cols.size() == 2) diags.push_back({unescape_field(cols[0]), unescape_field(cols[1])});
    }
  }
  return LanguageCorpus(std::move(language), std::move(files), std::move(diags));
}

}  // namespace plsim
