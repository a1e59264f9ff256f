#include <gtest/gtest.h>

#include <filesystem>

#include "plsim/error.hpp"
#include "plsim/report.hpp"
#include "plsim/text.hpp"

namespace fs = std::filesystem;
using namespace plsim;

namespace {

SimilarityMatrix matrix_of(std::vector<std::string> ids, std::vector<std::vector<double>> sym) {
  SimilarityMatrix m;
  for (auto& id : ids) m.languages.emplace_back(id);
  m.directed = sym;
  m.symmetrized = std::move(sym);
  return m;
}

SelfSimilarityDistribution dist_of(const std::string& lang, std::vector<double> scores) {
  SelfSimilarityDistribution d;
  d.language = LanguageId(lang);
  for (std::size_t i = 0; i < scores.size(); ++i) d.per_token_scores["t" + std::to_string(i)] = scores[i];
  return d;
}

}  // namespace

TEST(Order, DescendingRowMeanWithIdTieBreak) {
  // row means: a 0.5, b 0.7, c 0.4
  const auto m = matrix_of({"a", "b", "c"}, {{1.0, 0.8, 0.2}, {0.8, 1.0, 0.6}, {0.2, 0.6, 1.0}});
  EXPECT_EQ(order_languages(m), (std::vector<LanguageId>{LanguageId("b"), LanguageId("a"), LanguageId("c")}));
  const auto tie = matrix_of({"z", "y", "x"}, {{1, 0.5, 0.5}, {0.5, 1, 0.5}, {0.5, 0.5, 1}});
  EXPECT_EQ(order_languages(tie), (std::vector<LanguageId>{LanguageId("x"), LanguageId("y"), LanguageId("z")}));
}

TEST(Order, ReorderPermutesRowsAndColumns) {
  auto m = matrix_of({"a", "b", "c"}, {{1.0, 0.8, 0.2}, {0.8, 1.0, 0.6}, {0.2, 0.6, 1.0}});
  m.directed[0][2] = 0.3;
  const auto r = reorder(m, order_languages(m));
  EXPECT_EQ(r.languages[0], LanguageId("b"));
  EXPECT_DOUBLE_EQ(r.symmetrized[0][2], 0.6);
  EXPECT_DOUBLE_EQ(r.directed[1][2], 0.3);
  EXPECT_THROW(reorder(m, {LanguageId("a")}), Error);
}

TEST(Colors, EndpointsMidpointAndDegenerate) {
  ReportConfig cfg;
  EXPECT_EQ(cell_color(0.2, 0.2, 0.8, cfg), cfg.color_low);
  EXPECT_EQ(cell_color(0.8, 0.2, 0.8, cfg), cfg.color_high);
  EXPECT_EQ(cell_color(0.5, 0.5, 0.5, cfg), cfg.color_high);
  cfg.color_low = {0, 0, 0};
  cfg.color_high = {200, 100, 255};
  EXPECT_EQ(cell_color(0.5, 0.0, 1.0, cfg), (Rgb{100, 50, 128}));
  EXPECT_EQ(to_hex(Rgb{8, 48, 107}), "#08306b");
}

TEST(Svg, ScaleFollowsMatrixRangeOrAbsolute) {
  const auto m = matrix_of({"a", "b"}, {{1.0, 0.5}, {0.5, 1.0}});
  ReportConfig cfg;
  const auto svg = render_svg(m, cfg);
  EXPECT_NE(svg.find(to_hex(cfg.color_low)), std::string::npos);
  EXPECT_NE(svg.find("0.500"), std::string::npos);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  cfg.absolute_scale = true;
  const auto abs = render_svg(m, cfg);
  EXPECT_NE(abs.find("-1.000"), std::string::npos);
  EXPECT_NE(abs.find(to_hex(cell_color(0.5, -1.0, 1.0, cfg))), std::string::npos);
  cfg.decimals = 0;
  EXPECT_THROW(render_svg(m, cfg), Error);
}

TEST(Heatmap, WritesSortedCsvs) {
  const auto m = matrix_of({"a", "b", "c"}, {{1.0, 0.8, 0.2}, {0.8, 1.0, 0.6}, {0.2, 0.6, 1.0}});
  const auto dir = fs::path(testing::TempDir()) / "plsim_heatmap";
  fs::remove_all(dir);
  ReportConfig cfg;
  cfg.decimals = 2;
  render_heatmap(m, cfg, dir.string());
  EXPECT_EQ(read_file((dir / "symmetrized.csv").string()),
            "language,b,a,c\nb,1.00,0.80,0.60\na,0.80,1.00,0.20\nc,0.60,0.20,1.00\n");
  EXPECT_TRUE(fs::exists(dir / "directed.csv"));
  EXPECT_TRUE(fs::exists(dir / "heatmap.svg"));
  cfg.sort = SortOrder::Input;
  EXPECT_EQ(render_heatmap(m, cfg, dir.string()), m.languages);
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.5), 7.0);
  EXPECT_THROW(quantile({}, 0.5), Error);
}

TEST(Summary, PopulationVarianceAndDeltas) {
  const std::vector<SelfSimilarityDistribution> now{dist_of("a", {0.0, 1.0}), dist_of("b", {0.5})};
  const std::vector<SelfSimilarityDistribution> before{dist_of("a", {0.25, 0.25})};
  const auto rows = summarize_self_similarity(now, before);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].mean, 0.5);
  EXPECT_DOUBLE_EQ(rows[0].variance, 0.25);
  EXPECT_DOUBLE_EQ(rows[0].median, 0.5);
  EXPECT_DOUBLE_EQ(*rows[0].mean_delta, 0.25);
  EXPECT_DOUBLE_EQ(*rows[0].variance_delta, 0.25);
  EXPECT_FALSE(rows[1].mean_delta.has_value());
  const auto text = format_self_similarity_summary(rows, 3);
  const auto lines = split_lines(text);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[2], "a\t2\t0\t0.500\t0.250\t0.000\t0.250\t0.500\t0.750\t1.000\t0.250\t0.250");
  EXPECT_NE(lines[3].find("\tNA\tNA"), std::string::npos);
  EXPECT_THROW(summarize_self_similarity({}), Error);
}
