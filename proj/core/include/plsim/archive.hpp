#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "plsim/encoder.hpp"
#include "plsim/error.hpp"
#include "plsim/representation.hpp"

namespace plsim {

enum class ArchiveErrorCode {
  Malformed,
  NotAnArchive,
  VersionMismatch,
  WidthMismatch,
  DuplicateKey,
  Degenerate,
};

std::string_view to_string(ArchiveErrorCode code);

class ArchiveError : public FormatError {
 public:
  ArchiveError(ArchiveErrorCode code, std::size_t line, const std::string& message);
  ArchiveErrorCode code() const { return code_; }
  std::size_t line() const { return line_; }  // 1-based, 0 when not tied to a line

 private:
  ArchiveErrorCode code_;
  std::size_t line_;
};

/// lrep v1: a JSON header line followed by one JSON record per occurrence,
/// in ascending token order and then occurrence order.
std::string format_archive(const LanguageRepresentation& rep);
LanguageRepresentation parse_archive(std::string_view text);

void export_archive(const LanguageRepresentation& rep, const std::string& path);
LanguageRepresentation import_archive(const std::string& path);

/// `#plsim-samples v1 language=<id>` followed by
/// `occ_id<TAB>token<TAB>context<TAB>target_offset` records. Context lexemes
/// are field-escaped with spaces written as `\s`, then joined by spaces.
std::string format_samples(const LanguageId& language, const std::vector<OccurrenceSample>& samples);

struct SamplesFile {
  LanguageId language;
  std::vector<OccurrenceSample> samples;  // file_index and position are not stored
};
SamplesFile parse_samples(std::string_view text);

}  // namespace plsim
