#include "plsim/archive.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "plsim/text.hpp"

namespace plsim {

std::string_view to_string(ArchiveErrorCode code) {
  switch (code) {
    case ArchiveErrorCode::Malformed: return "malformed";
    case ArchiveErrorCode::NotAnArchive: return "not-an-archive";
    case ArchiveErrorCode::VersionMismatch: return "version-mismatch";
    case ArchiveErrorCode::WidthMismatch: return "width-mismatch";
    case ArchiveErrorCode::DuplicateKey: return "duplicate-key";
    case ArchiveErrorCode::Degenerate: return "degenerate-representation";
  }
  return "unknown";
}

ArchiveError::ArchiveError(ArchiveErrorCode code, std::size_t line, const std::string& message)
    : FormatError("lrep " + std::string(to_string(code)) + (line ? " at line " + std::to_string(line) : "") +
                  ": " + message),
      code_(code),
      line_(line) {}

namespace {

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

void append_float(std::string& out, float v) {
  if (!std::isfinite(v)) throw ArchiveError(ArchiveErrorCode::Malformed, 0, "non-finite vector component");
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string format_archive(const LanguageRepresentation& rep) {
  rep.validate();
  nlohmann::ordered_json header;
  header["format"] = "lrep";
  header["version"] = 1;
  header["language"] = rep.language.str();
  header["dim"] = rep.dim;
  header["encoder"] = rep.encoder_tag;
  std::string out = header.dump() + "\n";
  for (const auto& [token, set] : rep.sets) {
    const std::string prefix = "{\"token\":" + json_string(token) + ",\"occ\":";
    for (std::size_t i = 0; i < set.size(); ++i) {
      out += prefix;
      out += std::to_string(set.occurrences[i]);
      out += ",\"vec\":[";
      const auto row = set.row(i);
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) out += ',';
        append_float(out, row[k]);
      }
      out += "]}\n";
    }
  }
  return out;
}

LanguageRepresentation parse_archive(std::string_view text) {
  using Code = ArchiveErrorCode;
  const auto lines = split_lines(text);
  if (lines.empty()) throw ArchiveError(Code::NotAnArchive, 0, "empty file");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(lines[0]);
  } catch (const nlohmann::json::exception&) {
    throw ArchiveError(Code::NotAnArchive, 1, "header is not a JSON object");
  }
  if (!header.is_object() || header.value("format", "") != "lrep") {
    throw ArchiveError(Code::NotAnArchive, 1, "header lacks \"format\":\"lrep\"");
  }
  if (!header.contains("version") || !header["version"].is_number_integer()) {
    throw ArchiveError(Code::Malformed, 1, "header lacks an integer version");
  }
  if (header["version"].get<long long>() != 1) {
    throw ArchiveError(Code::VersionMismatch, 1,
                       "unsupported version " + header["version"].dump() + " (expected 1)");
  }
  LanguageRepresentation rep;
  try {
    rep.language = LanguageId(header.at("language").get<std::string>());
    rep.encoder_tag = header.at("encoder").get<std::string>();
    const auto dim = header.at("dim").get<long long>();
    if (dim <= 0) throw ArchiveError(Code::Malformed, 1, "dim must be positive");
    rep.dim = static_cast<std::size_t>(dim);
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError(Code::Malformed, 1, e.what());
  } catch (const CorpusError& e) {
    throw ArchiveError(Code::Malformed, 1, e.what());
  }

  std::set<std::pair<std::string, std::int64_t>> seen;
  std::vector<float> vec;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) throw ArchiveError(Code::Malformed, line_no, "blank line");
    nlohmann::json rec;
    std::string token;
    std::int64_t occ = 0;
    try {
      rec = nlohmann::json::parse(lines[i]);
      token = rec.at("token").get<std::string>();
      occ = rec.at("occ").get<std::int64_t>();
      const auto& arr = rec.at("vec");
      if (!arr.is_array()) throw ArchiveError(Code::Malformed, line_no, "vec is not an array");
      vec.clear();
      for (const auto& x : arr) {
        if (!x.is_number()) throw ArchiveError(Code::Malformed, line_no, "non-numeric vector component");
        vec.push_back(x.get<float>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ArchiveError(Code::Malformed, line_no, e.what());
    }
    if (vec.size() != rep.dim) {
      throw ArchiveError(Code::WidthMismatch, line_no,
                         "record width " + std::to_string(vec.size()) + " differs from dim " + std::to_string(rep.dim));
    }
    if (!seen.emplace(token, occ).second) {
      throw ArchiveError(Code::DuplicateKey, line_no,
                         "duplicate (token, occ) = (" + json_string(token) + ", " + std::to_string(occ) + ")");
    }
    auto [it, inserted] = rep.sets.try_emplace(token);
    if (inserted) {
      it->second.token = token;
      it->second.dim = rep.dim;
    }
    it->second.add(occ, vec);
  }
  if (rep.sets.empty()) throw ArchiveError(Code::Degenerate, 0, "archive has no records");
  return rep;
}

void export_archive(const LanguageRepresentation& rep, const std::string& path) {
  write_file(path, format_archive(rep));
}

LanguageRepresentation import_archive(const std::string& path) { return parse_archive(read_file(path)); }

namespace {

std::string escape_context_lexeme(std::string_view lexeme) {
  std::string out;
  for (char c : escape_field(lexeme)) {
    if (c == ' ') out += "\\s";
    else out += c;
  }
  return out;
}

}  // namespace

std::string format_samples(const LanguageId& language, const std::vector<OccurrenceSample>& samples) {
  std::string out = "#plsim-samples v1 language=" + language.str() + "\n";
  for (const auto& s : samples) {
    out += std::to_string(s.occurrence);
    out += '\t';
    out += escape_field(s.token);
    out += '\t';
    for (std::size_t i = 0; i < s.context.size(); ++i) {
      if (i) out += ' ';
      out += escape_context_lexeme(s.context[i]);
    }
    out += '\t';
    out += std::to_string(s.target_offset);
    out += '\n';
  }
  return out;
}

SamplesFile parse_samples(std::string_view text) {
  const auto lines = split_lines(text);
  constexpr std::string_view kMagic = "#plsim-samples v1 language=";
  if (lines.empty() || !lines[0].starts_with(kMagic)) throw FormatError("missing '#plsim-samples v1' header");
  SamplesFile file;
  file.language = LanguageId(std::string(lines[0].substr(kMagic.size())));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    const std::string where = "samples line " + std::to_string(i + 1);
    if (cols.size() != 4) throw FormatError(where + ": expected 4 columns");
    OccurrenceSample s;
    auto parse_int = [&](std::string_view field, auto& out) {
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw FormatError(where + ": bad integer '" + std::string(field) + "'");
      }
    };
    parse_int(cols[0], s.occurrence);
    s.token = unescape_field(cols[1]);
    if (!cols[2].empty()) {
      for (auto part : split(cols[2], ' ')) s.context.push_back(unescape_field(part));
    }
    parse_int(cols[3], s.target_offset);
    if (s.target_offset >= s.context.size()) throw FormatError(where + ": target_offset outside the context");
    file.samples.push_back(std::move(s));
  }
  return file;
}

}  // namespace plsim
