#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plsim/similarity.hpp"

namespace plsim {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

std::string to_hex(Rgb c);

enum class SortOrder { AverageSimilarity, Input };

struct ReportConfig {
  SortOrder sort = SortOrder::AverageSimilarity;
  Rgb color_low{247, 251, 255};
  Rgb color_high{8, 48, 107};
  int decimals = 6;              // CSV precision, 1..9
  bool include_directed = true;
  bool absolute_scale = false;   // color over [-1, 1] instead of the matrix range

  void validate() const;
};

/// Descending mean of off-diagonal symmetrized scores, ties ascending by id.
std::vector<LanguageId> order_languages(const SimilarityMatrix& matrix);

/// The same matrix with rows and columns permuted into `order`.
SimilarityMatrix reorder(const SimilarityMatrix& matrix, const std::vector<LanguageId>& order);

/// Linear interpolation between the endpoints over [lo, hi]; a degenerate
/// range maps to the high endpoint.
Rgb cell_color(double value, double lo, double hi, const ReportConfig& config);

std::string render_svg(const SimilarityMatrix& matrix, const ReportConfig& config);

/// Writes symmetrized.csv, directed.csv (when configured) and heatmap.svg
/// for the sorted matrix; returns the language order used.
std::vector<LanguageId> render_heatmap(const SimilarityMatrix& matrix, const ReportConfig& config,
                                       const std::string& dir);

struct SelfSimilaritySummary {
  LanguageId language;
  std::size_t tokens = 0;
  std::size_t excluded_singletons = 0;
  double mean = 0.0, variance = 0.0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  std::optional<double> mean_delta, variance_delta;  // against a comparison run
};

/// Linear-interpolation quantile of sorted values, q in [0, 1].
double quantile(const std::vector<double>& sorted, double q);

std::vector<SelfSimilaritySummary> summarize_self_similarity(
    std::span<const SelfSimilarityDistribution> dists,
    std::span<const SelfSimilarityDistribution> comparison = {});

std::string format_self_similarity_summary(const std::vector<SelfSimilaritySummary>& rows, int decimals = 6);

}  // namespace plsim
