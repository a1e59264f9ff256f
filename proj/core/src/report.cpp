#include "plsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>

#include "plsim/error.hpp"
#include "plsim/text.hpp"

namespace fs = std::filesystem;

namespace plsim {

std::string to_hex(Rgb c) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s = "#";
  for (std::uint8_t v : {c.r, c.g, c.b}) {
    s += kHex[v >> 4];
    s += kHex[v & 15];
  }
  return s;
}

void ReportConfig::validate() const {
  if (decimals < 1 || decimals > 9) throw Error("report decimals must lie in [1, 9]");
}

std::vector<LanguageId> order_languages(const SimilarityMatrix& matrix) {
  const std::size_t n = matrix.size();
  std::vector<std::pair<double, LanguageId>> rows;
  for (std::size_t a = 0; a < n; ++a) {
    double sum = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b) sum += matrix.symmetrized[a][b];
    }
    rows.emplace_back(n > 1 ? sum / static_cast<double>(n - 1) : 0.0, matrix.languages[a]);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<LanguageId> out;
  for (auto& [avg, id] : rows) out.push_back(std::move(id));
  return out;
}

SimilarityMatrix reorder(const SimilarityMatrix& matrix, const std::vector<LanguageId>& order) {
  if (order.size() != matrix.size()) throw Error("reorder: order has the wrong length");
  std::vector<std::size_t> idx;
  for (const auto& id : order) {
    const auto it = std::find(matrix.languages.begin(), matrix.languages.end(), id);
    if (it == matrix.languages.end()) throw Error("reorder: unknown language " + id.str());
    idx.push_back(static_cast<std::size_t>(it - matrix.languages.begin()));
  }
  const std::size_t n = order.size();
  SimilarityMatrix out;
  out.languages = order;
  out.directed.assign(n, std::vector<double>(n));
  out.symmetrized.assign(n, std::vector<double>(n));
  if (!matrix.per_token.empty()) out.per_token.assign(n, std::vector<std::vector<TokenScore>>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      out.directed[a][b] = matrix.directed[idx[a]][idx[b]];
      out.symmetrized[a][b] = matrix.symmetrized[idx[a]][idx[b]];
      if (!matrix.per_token.empty()) out.per_token[a][b] = matrix.per_token[idx[a]][idx[b]];
    }
  }
  return out;
}

Rgb cell_color(double value, double lo, double hi, const ReportConfig& config) {
  const double t = hi > lo ? std::clamp((value - lo) / (hi - lo), 0.0, 1.0) : 1.0;
  auto mix = [t](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(a + t * (static_cast<double>(b) - a)));
  };
  const Rgb& l = config.color_low;
  const Rgb& h = config.color_high;
  return {mix(l.r, h.r), mix(l.g, h.g), mix(l.b, h.b)};
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const SimilarityMatrix& matrix, const ReportConfig& config) {
  config.validate();
  const std::size_t n = matrix.size();
  double lo = -1.0, hi = 1.0;
  if (!config.absolute_scale) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& row : matrix.symmetrized) {
      for (double v : row) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  constexpr int kCell = 44, kMargin = 110, kLegend = 40;
  const int side = kMargin + static_cast<int>(n) * kCell;
  const int width = side + 10;
  const int height = side + kLegend;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                    std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const int c = kMargin + static_cast<int>(i) * kCell + kCell / 2;
    const std::string label = xml_escape(matrix.languages[i].str());
    svg += "<text x=\"" + std::to_string(kMargin - 6) + "\" y=\"" + std::to_string(c + 4) +
           "\" text-anchor=\"end\">" + label + "</text>\n";
    svg += "<text x=\"" + std::to_string(c) + "\" y=\"" + std::to_string(kMargin - 6) +
           "\" text-anchor=\"start\" transform=\"rotate(-60 " + std::to_string(c) + " " +
           std::to_string(kMargin - 6) + ")\">" + label + "</text>\n";
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double v = matrix.symmetrized[a][b];
      const Rgb color = cell_color(v, lo, hi, config);
      const int x = kMargin + static_cast<int>(b) * kCell;
      const int y = kMargin + static_cast<int>(a) * kCell;
      const double luminance = 0.299 * color.r + 0.587 * color.g + 0.114 * color.b;
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
             std::to_string(kCell) + "\" height=\"" + std::to_string(kCell) + "\" fill=\"" + to_hex(color) +
             "\"><title>" + xml_escape(matrix.languages[a].str()) + " / " + xml_escape(matrix.languages[b].str()) +
             ": " + format_fixed(v, config.decimals) + "</title></rect>\n";
      svg += "<text x=\"" + std::to_string(x + kCell / 2) + "\" y=\"" + std::to_string(y + kCell / 2 + 4) +
             "\" text-anchor=\"middle\" fill=\"" + (luminance < 128.0 ? "#ffffff" : "#000000") + "\">" +
             format_fixed(v, 2) + "</text>\n";
    }
  }
  const int ly = side + 14;
  svg += "<text x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(ly + 12) + "\">" +
         format_fixed(lo, 3) + "</text>\n";
  svg += "<rect x=\"" + std::to_string(kMargin + 40) + "\" y=\"" + std::to_string(ly) +
         "\" width=\"20\" height=\"16\" fill=\"" + to_hex(config.color_low) + "\"/>\n";
  svg += "<rect x=\"" + std::to_string(kMargin + 60) + "\" y=\"" + std::to_string(ly) +
         "\" width=\"20\" height=\"16\" fill=\"" + to_hex(config.color_high) + "\"/>\n";
  svg += "<text x=\"" + std::to_string(kMargin + 86) + "\" y=\"" + std::to_string(ly + 12) + "\">" +
         format_fixed(hi, 3) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::vector<LanguageId> render_heatmap(const SimilarityMatrix& matrix, const ReportConfig& config,
                                       const std::string& dir) {
  config.validate();
  const auto order = config.sort == SortOrder::AverageSimilarity ? order_languages(matrix) : matrix.languages;
  const SimilarityMatrix sorted = reorder(matrix, order);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create report directory " + dir + ": " + ec.message());
  write_file((fs::path(dir) / "symmetrized.csv").string(),
             format_matrix_csv(sorted.languages, sorted.symmetrized, config.decimals));
  if (config.include_directed) {
    write_file((fs::path(dir) / "directed.csv").string(),
               format_matrix_csv(sorted.languages, sorted.directed, config.decimals));
  }
  write_file((fs::path(dir) / "heatmap.svg").string(), render_svg(sorted, config));
  return order;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error("quantile of an empty list");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<SelfSimilaritySummary> summarize_self_similarity(std::span<const SelfSimilarityDistribution> dists,
                                                             std::span<const SelfSimilarityDistribution> comparison) {
  if (dists.empty()) throw Error("self-similarity summary needs at least one distribution");
  auto summarize = [](const SelfSimilarityDistribution& d) {
    SelfSimilaritySummary row;
    row.language = d.language;
    row.tokens = d.per_token_scores.size();
    row.excluded_singletons = d.excluded_singletons;
    std::vector<double> scores;
    for (const auto& [token, s] : d.per_token_scores) scores.push_back(s);
    if (scores.empty()) throw Error("self-similarity distribution for " + d.language.str() + " has no scores");
    double sum = 0.0;
    for (double s : scores) sum += s;
    row.mean = sum / static_cast<double>(scores.size());
    double ss = 0.0;
    for (double s : scores) ss += (s - row.mean) * (s - row.mean);
    row.variance = ss / static_cast<double>(scores.size());
    std::sort(scores.begin(), scores.end());
    row.min = scores.front();
    row.q1 = quantile(scores, 0.25);
    row.median = quantile(scores, 0.5);
    row.q3 = quantile(scores, 0.75);
    row.max = scores.back();
    return row;
  };
  std::map<LanguageId, SelfSimilaritySummary> base;
  for (const auto& d : comparison) base.emplace(d.language, summarize(d));
  std::vector<SelfSimilaritySummary> rows;
  for (const auto& d : dists) {
    auto row = summarize(d);
    if (const auto it = base.find(row.language); it != base.end()) {
      row.mean_delta = row.mean - it->second.mean;
      row.variance_delta = row.variance - it->second.variance;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_self_similarity_summary(const std::vector<SelfSimilaritySummary>& rows, int decimals) {
  const bool deltas = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.mean_delta.has_value(); });
  std::string out = "# variance is the population variance (divide by n); quartiles interpolate linearly\n";
  out += "language\ttokens\texcluded_singletons\tmean\tvariance\tmin\tq1\tmedian\tq3\tmax";
  if (deltas) out += "\tmean_delta\tvariance_delta";
  out += "\n";
  auto num = [decimals](double v) { return format_fixed(v, decimals); };
  for (const auto& r : rows) {
    out += r.language.str() + "\t" + std::to_string(r.tokens) + "\t" + std::to_string(r.excluded_singletons) + "\t" +
           num(r.mean) + "\t" + num(r.variance) + "\t" + num(r.min) + "\t" + num(r.q1) + "\t" + num(r.median) + "\t" +
           num(r.q3) + "\t" + num(r.max);
    if (deltas) {
      out += "\t" + (r.mean_delta ? num(*r.mean_delta) : std::string("NA"));
      out += "\t" + (r.variance_delta ? num(*r.variance_delta) : std::string("NA"));
    }
    out += "\n";
  }
  return out;
}

}  // namespace plsim
