#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <json.hpp>

#include "plsim/archive.hpp"
#include "plsim/text.hpp"
#include "support/generators.hpp"

using namespace plsim;

namespace {

LanguageRepresentation sample_rep() {
  gen::Rng rng(17);
  auto rep = gen::representation(rng, "c++", 5, 6, 4);
  rep.sets.emplace("\"quo\\te\"\n", gen::set(rng, "\"quo\\te\"\n", 5, 3));
  rep.sets.emplace("\xc3\xa9", gen::set(rng, "\xc3\xa9", 5, 2));
  return rep;
}

ArchiveErrorCode code_of(std::string_view text) {
  try {
    parse_archive(text);
  } catch (const ArchiveError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ArchiveErrorCode::Malformed;
}

const std::string kHeader = R"({"format":"lrep","version":1,"language":"c","dim":2,"encoder":"e"})";

}  // namespace

TEST(Archive, RoundTripIsExact) {
  const auto rep = sample_rep();
  const auto text = format_archive(rep);
  const auto back = parse_archive(text);
  EXPECT_EQ(back.language, rep.language);
  EXPECT_EQ(back.encoder_tag, rep.encoder_tag);
  EXPECT_EQ(back.dim, rep.dim);
  ASSERT_EQ(back.sets.size(), rep.sets.size());
  for (const auto& [tok, set] : rep.sets) {
    const auto& b = back.sets.at(tok);
    EXPECT_EQ(b.values, set.values) << tok;
    EXPECT_EQ(b.occurrences, set.occurrences) << tok;
  }
  EXPECT_EQ(format_archive(back), text);
}

TEST(Archive, ExtremeFloatsSurvive) {
  LanguageRepresentation rep;
  rep.language = LanguageId("c");
  rep.dim = 4;
  rep.sets.emplace("t", TokenEmbeddingSet::from_rows("t", {{std::numeric_limits<float>::min(),
                                                             std::numeric_limits<float>::max(), -0.1f, 1e-30f}}));
  EXPECT_EQ(parse_archive(format_archive(rep)).sets.at("t").values, rep.sets.at("t").values);
  rep.sets.at("t").values[0] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(format_archive(rep), ArchiveError);
}

TEST(Archive, HeaderFirstRecordsOrdered) {
  const auto text = format_archive(sample_rep());
  const auto lines = split_lines(text);
  const auto header = nlohmann::json::parse(lines[0]);
  EXPECT_EQ(header["format"], "lrep");
  EXPECT_EQ(header["version"], 1);
  EXPECT_EQ(header["dim"], 5);
  std::pair<std::string, std::int64_t> prev{"", -1};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto rec = nlohmann::json::parse(lines[i]);
    const std::pair<std::string, std::int64_t> key{rec["token"].get<std::string>(), rec["occ"].get<std::int64_t>()};
    EXPECT_LT(prev, key);
    prev = key;
  }
}

TEST(Archive, ErrorCodes) {
  EXPECT_EQ(code_of(""), ArchiveErrorCode::NotAnArchive);
  EXPECT_EQ(code_of("not json\n"), ArchiveErrorCode::NotAnArchive);
  EXPECT_EQ(code_of(R"({"format":"other","version":1})"), ArchiveErrorCode::NotAnArchive);
  EXPECT_EQ(code_of(R"({"format":"lrep","version":2,"language":"c","dim":2,"encoder":"e"})"),
            ArchiveErrorCode::VersionMismatch);
  EXPECT_EQ(code_of(R"({"format":"lrep","version":1,"language":"C","dim":2,"encoder":"e"})"),
            ArchiveErrorCode::Malformed);
  EXPECT_EQ(code_of(kHeader + "\n"), ArchiveErrorCode::Degenerate);
  EXPECT_EQ(code_of(kHeader + "\n" + R"({"token":"a","occ":0,"vec":[1,2,3]})" + "\n"),
            ArchiveErrorCode::WidthMismatch);
  EXPECT_EQ(code_of(kHeader + "\n" + R"({"token":"a","occ":0,"vec":[1,2]})" + "\n" +
                    R"({"token":"a","occ":0,"vec":[3,4]})" + "\n"),
            ArchiveErrorCode::DuplicateKey);
  EXPECT_EQ(code_of(kHeader + "\n" + R"({"token":"a","occ":0,"vec":[1,"x"]})" + "\n"), ArchiveErrorCode::Malformed);
  EXPECT_EQ(code_of(kHeader + "\n\n"), ArchiveErrorCode::Malformed);
}

TEST(Archive, ErrorsCarryLineNumbers) {
  try {
    parse_archive(kHeader + "\n" + R"({"token":"a","occ":0,"vec":[1,2]})" + "\n" + R"({"token":"b","occ":0,"vec":[1]})");
    FAIL();
  } catch (const ArchiveError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("width-mismatch"), std::string::npos);
  }
}

TEST(Samples, RoundTrip) {
  std::vector<OccurrenceSample> samples{
      {"x", 0, 3, 9, {"int", "x", "=", "\"a b\"", ";"}, 1},
      {"tab\tkey", 4, 0, 0, {"tab\tkey"}, 0},
      {"=", 7, 1, 2, {"// line\\comment", "=", "\"\\n\""}, 1},
  };
  const auto text = format_samples(LanguageId("c"), samples);
  EXPECT_EQ(split_lines(text)[1], "0\tx\tint x = \"a\\sb\" ;\t1");
  const auto back = parse_samples(text);
  EXPECT_EQ(back.language, LanguageId("c"));
  ASSERT_EQ(back.samples.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].token, samples[i].token);
    EXPECT_EQ(back.samples[i].occurrence, samples[i].occurrence);
    EXPECT_EQ(back.samples[i].context, samples[i].context);
    EXPECT_EQ(back.samples[i].target_offset, samples[i].target_offset);
  }
}

TEST(Samples, Errors) {
  EXPECT_THROW(parse_samples("0\tx\tx\t0\n"), FormatError);
  EXPECT_THROW(parse_samples("#plsim-samples v1 language=c\n0\tx\tx\n"), FormatError);
  EXPECT_THROW(parse_samples("#plsim-samples v1 language=c\n0\tx\tx y\t2\n"), FormatError);
  EXPECT_THROW(parse_samples("#plsim-samples v1 language=c\nz\tx\tx\t0\n"), FormatError);
}
