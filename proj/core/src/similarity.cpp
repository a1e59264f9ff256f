#include "plsim/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>

#include <Eigen/Dense>

#include "plsim/error.hpp"
#include "plsim/parallel.hpp"
#include "plsim/text.hpp"

namespace fs = std::filesystem;

namespace plsim {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr Eigen::Index kBlock = 128;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Unit-norm copy of a set in double precision, rows in set order.
RowMatrix normalized(const TokenEmbeddingSet& set, bool strict) {
  RowMatrix m(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(set.dim));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto row = set.row(i);
    double sq = 0.0;
    if (strict) {
      for (float x : row) sq += static_cast<double>(x) * static_cast<double>(x);
    } else {
      for (std::size_t k = 0; k < row.size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
      sq = m.row(static_cast<Eigen::Index>(i)).squaredNorm();
    }
    if (!(sq > 0.0)) {
      throw SimilarityError("zero-norm vector for token '" + set.token + "' occurrence " +
                            std::to_string(set.occurrences[i]));
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t k = 0; k < row.size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = static_cast<double>(row[k]) * inv;
    }
  }
  return m;
}

double strict_dot(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
  const double* x = a.data() + i * a.cols();
  const double* y = b.data() + j * b.cols();
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) s += x[k] * y[k];
  return s;
}

// Row maxima and column maxima of the cosine grid a * b^T. With
// `exclude_diagonal`, a and b are the same set and cell (i, i) is skipped.
void grid_maxima(const RowMatrix& a, const RowMatrix& b, Kernel kernel, bool exclude_diagonal,
                 std::vector<double>& row_max, std::vector<double>& col_max) {
  row_max.assign(static_cast<std::size_t>(a.rows()), kNegInf);
  col_max.assign(static_cast<std::size_t>(b.rows()), kNegInf);
  if (kernel == Kernel::Strict) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.rows(); ++j) {
        if (exclude_diagonal && i == j) continue;
        const double c = strict_dot(a, i, b, j);
        auto& r = row_max[static_cast<std::size_t>(i)];
        auto& k = col_max[static_cast<std::size_t>(j)];
        r = std::max(r, c);
        k = std::max(k, c);
      }
    }
  } else {
    RowMatrix block;
    for (Eigen::Index i0 = 0; i0 < a.rows(); i0 += kBlock) {
      const Eigen::Index ni = std::min(kBlock, a.rows() - i0);
      for (Eigen::Index j0 = 0; j0 < b.rows(); j0 += kBlock) {
        const Eigen::Index nj = std::min(kBlock, b.rows() - j0);
        block.noalias() = a.middleRows(i0, ni) * b.middleRows(j0, nj).transpose();
        if (exclude_diagonal) {
          for (Eigen::Index i = std::max(i0, j0); i < std::min(i0 + ni, j0 + nj); ++i) block(i - i0, i - j0) = kNegInf;
        }
        for (Eigen::Index i = 0; i < ni; ++i) {
          auto& r = row_max[static_cast<std::size_t>(i0 + i)];
          r = std::max(r, block.row(i).maxCoeff());
        }
        for (Eigen::Index j = 0; j < nj; ++j) {
          auto& k = col_max[static_cast<std::size_t>(j0 + j)];
          k = std::max(k, block.col(j).maxCoeff());
        }
      }
    }
  }
  for (double& x : row_max) x = clamp_unit(x);
  for (double& x : col_max) x = clamp_unit(x);
}

// Normalized matrices for every set of a representation.
using Prepared = std::map<std::string, RowMatrix>;

Prepared prepare(const LanguageRepresentation& rep, Kernel kernel) {
  Prepared out;
  if (kernel == Kernel::Oracle) return out;
  for (const auto& [token, set] : rep.sets) out.emplace(token, normalized(set, kernel == Kernel::Strict));
  return out;
}

struct PairScores {
  std::vector<TokenScore> ab, ba;
  std::size_t dropped = 0;
};

std::vector<std::string> shared_keys(const LanguageRepresentation& a, const LanguageRepresentation& b,
                                     std::size_t* dropped) {
  std::vector<std::string> keys;
  std::size_t only = 0;
  auto ia = a.sets.begin();
  auto ib = b.sets.begin();
  while (ia != a.sets.end() || ib != b.sets.end()) {
    if (ib == b.sets.end() || (ia != a.sets.end() && ia->first < ib->first)) {
      ++only;
      ++ia;
    } else if (ia == a.sets.end() || ib->first < ia->first) {
      ++only;
      ++ib;
    } else {
      keys.push_back(ia->first);
      ++ia;
      ++ib;
    }
  }
  if (dropped) *dropped = only;
  return keys;
}

void check_pair(const LanguageRepresentation& a, const LanguageRepresentation& b) {
  if (a.dim != b.dim) {
    throw SimilarityError("dimension mismatch: " + a.language.str() + " has " + std::to_string(a.dim) + ", " +
                          b.language.str() + " has " + std::to_string(b.dim));
  }
}

PairScores compare(const LanguageRepresentation& a, const Prepared& pa, const LanguageRepresentation& b,
                   const Prepared& pb, Kernel kernel, bool both_directions) {
  check_pair(a, b);
  PairScores out;
  const auto keys = shared_keys(a, b, &out.dropped);
  if (keys.empty()) {
    throw SimilarityError("no shared tokens between " + a.language.str() + " and " + b.language.str());
  }
  std::vector<double> row_max, col_max;
  for (const auto& key : keys) {
    if (kernel == Kernel::Oracle) {
      out.ab.push_back({key, token_set_similarity(a.sets.at(key), b.sets.at(key))});
      if (both_directions) out.ba.push_back({key, token_set_similarity(b.sets.at(key), a.sets.at(key))});
      continue;
    }
    grid_maxima(pa.at(key), pb.at(key), kernel, false, row_max, col_max);
    out.ab.push_back({key, mean_of(row_max)});
    if (both_directions) out.ba.push_back({key, mean_of(col_max)});
  }
  return out;
}

double mean_score(const std::vector<TokenScore>& scores) {
  double sum = 0.0;
  for (const auto& s : scores) sum += s.score;
  return sum / static_cast<double>(scores.size());
}

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw SimilarityError("cosine of vectors with widths " + std::to_string(u.size()) + " and " +
                          std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double x = u[k], y = v[k];
    dot += x * y;
    uu += x * x;
    vv += y * y;
  }
  if (!(uu > 0.0) || !(vv > 0.0)) throw SimilarityError("cosine of a zero-norm vector");
  return clamp_unit(dot / (std::sqrt(uu) * std::sqrt(vv)));
}

double directed_token_similarity(std::span<const float> v, const TokenEmbeddingSet& target) {
  if (target.empty()) throw SimilarityError("empty target set for token '" + target.token + "'");
  double best = kNegInf;
  for (std::size_t j = 0; j < target.size(); ++j) best = std::max(best, cosine(v, target.row(j)));
  return best;
}

double token_set_similarity(const TokenEmbeddingSet& source, const TokenEmbeddingSet& target) {
  if (source.token != target.token) {
    throw SimilarityError("token mismatch: '" + source.token + "' vs '" + target.token + "'");
  }
  if (source.empty()) throw SimilarityError("empty source set for token '" + source.token + "'");
  double sum = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) sum += directed_token_similarity(source.row(i), target);
  return sum / static_cast<double>(source.size());
}

LanguageSimilarity language_similarity(const LanguageRepresentation& a, const LanguageRepresentation& b,
                                       Kernel kernel) {
  check_pair(a, b);
  const auto pa = prepare(a, kernel);
  const auto pb = prepare(b, kernel);
  auto scores = compare(a, pa, b, pb, kernel, false);
  LanguageSimilarity out;
  out.shared = scores.ab.size();
  out.dropped = scores.dropped;
  out.value = mean_score(scores.ab);
  out.per_token = std::move(scores.ab);
  return out;
}

double SimilarityMatrix::spread() const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t a = 0; a < size(); ++a) {
    for (std::size_t b = 0; b < size(); ++b) {
      if (a == b) continue;
      lo = std::min(lo, symmetrized[a][b]);
      hi = std::max(hi, symmetrized[a][b]);
    }
  }
  return size() < 2 ? 0.0 : hi - lo;
}

SimilarityMatrix pairwise_matrix(std::span<const LanguageRepresentation> reps, const MatrixOptions& options) {
  if (reps.size() < 2) throw SimilarityError("pairwise matrix needs at least 2 representations");
  const std::size_t n = reps.size();
  SimilarityMatrix m;
  for (const auto& rep : reps) {
    rep.validate();
    if (rep.dim != reps[0].dim) {
      throw SimilarityError("dimension mismatch: " + rep.language.str() + " has " + std::to_string(rep.dim) +
                            ", " + reps[0].language.str() + " has " + std::to_string(reps[0].dim));
    }
    if (std::find(m.languages.begin(), m.languages.end(), rep.language) != m.languages.end()) {
      throw SimilarityError("language appears twice: " + rep.language.str());
    }
    m.languages.push_back(rep.language);
  }

  std::vector<Prepared> prepared(n);
  parallel_for(n, options.threads, [&](std::size_t i) { prepared[i] = prepare(reps[i], options.kernel); });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) pairs.emplace_back(a, b);
  }
  std::vector<PairScores> results(pairs.size());
  parallel_for(pairs.size(), options.threads, [&](std::size_t p) {
    const auto [a, b] = pairs[p];
    try {
      results[p] = compare(reps[a], prepared[a], reps[b], prepared[b], options.kernel, a != b);
    } catch (const Error& e) {
      throw SimilarityError("pair (" + reps[a].language.str() + ", " + reps[b].language.str() + "): " + e.what());
    }
  });

  m.directed.assign(n, std::vector<double>(n, 0.0));
  if (options.per_token) m.per_token.assign(n, std::vector<std::vector<TokenScore>>(n));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    auto& r = results[p];
    m.directed[a][b] = mean_score(r.ab);
    if (a != b) m.directed[b][a] = mean_score(r.ba);
    if (options.per_token) {
      if (a != b) m.per_token[b][a] = std::move(r.ba);
      m.per_token[a][b] = std::move(r.ab);
    }
  }
  m.symmetrized.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) m.symmetrized[a][b] = 0.5 * (m.directed[a][b] + m.directed[b][a]);
  }
  return m;
}

SelfSimilarityDistribution self_similarity(const LanguageRepresentation& rep, Kernel kernel) {
  rep.validate();
  SelfSimilarityDistribution dist;
  dist.language = rep.language;
  std::vector<double> row_max, col_max;
  for (const auto& [token, set] : rep.sets) {
    if (set.size() < 2) {
      ++dist.excluded_singletons;
      continue;
    }
    double score = 0.0;
    if (kernel == Kernel::Oracle) {
      double sum = 0.0;
      for (std::size_t i = 0; i < set.size(); ++i) {
        double best = kNegInf;
        for (std::size_t j = 0; j < set.size(); ++j) {
          if (i != j) best = std::max(best, cosine(set.row(i), set.row(j)));
        }
        sum += best;
      }
      score = sum / static_cast<double>(set.size());
    } else {
      const RowMatrix m = normalized(set, kernel == Kernel::Strict);
      grid_maxima(m, m, kernel, true, row_max, col_max);
      score = mean_of(row_max);
    }
    dist.per_token_scores.emplace(token, score);
  }
  if (dist.per_token_scores.empty()) {
    throw SimilarityError("self-similarity of " + rep.language.str() + ": every token set is a singleton");
  }
  double sum = 0.0;
  for (const auto& [token, s] : dist.per_token_scores) sum += s;
  dist.mean = sum / static_cast<double>(dist.per_token_scores.size());
  double ss = 0.0;
  for (const auto& [token, s] : dist.per_token_scores) ss += (s - dist.mean) * (s - dist.mean);
  dist.variance = ss / static_cast<double>(dist.per_token_scores.size());
  return dist;
}

// ---------------------------------------------------------------------------
// Files

namespace {

double parse_real(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(where + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string format_matrix_csv(const std::vector<LanguageId>& languages, const std::vector<std::vector<double>>& grid,
                              int decimals) {
  std::string out = "language";
  for (const auto& l : languages) out += "," + l.str();
  out += "\n";
  for (std::size_t a = 0; a < languages.size(); ++a) {
    out += languages[a].str();
    for (std::size_t b = 0; b < languages.size(); ++b) out += "," + format_fixed(grid[a][b], decimals);
    out += "\n";
  }
  return out;
}

MatrixCsv parse_matrix_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw FormatError("empty matrix file");
  const auto head = split(lines[0], ',');
  if (head.empty() || head[0] != "language") throw FormatError("matrix header must start with 'language'");
  MatrixCsv out;
  for (std::size_t i = 1; i < head.size(); ++i) out.languages.emplace_back(std::string(head[i]));
  const std::size_t n = out.languages.size();
  if (lines.size() != n + 1) throw FormatError("matrix has " + std::to_string(lines.size() - 1) + " rows, expected " + std::to_string(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::string where = "matrix row " + std::to_string(r + 1);
    const auto cols = split(lines[r + 1], ',');
    if (cols.size() != n + 1) throw FormatError(where + ": expected " + std::to_string(n + 1) + " columns");
    if (cols[0] != out.languages[r].str()) throw FormatError(where + ": row label does not match the header");
    std::vector<double> row;
    for (std::size_t c = 1; c <= n; ++c) row.push_back(parse_real(cols[c], where));
    out.grid.push_back(std::move(row));
  }
  return out;
}

std::string format_per_token_tsv(const SimilarityMatrix& matrix, int decimals) {
  std::string out = "token\tlang_a\tlang_b\tscore\n";
  if (matrix.per_token.empty()) return out;
  for (std::size_t a = 0; a < matrix.size(); ++a) {
    for (std::size_t b = 0; b < matrix.size(); ++b) {
      for (const auto& s : matrix.per_token[a][b]) {
        out += escape_field(s.token) + "\t" + matrix.languages[a].str() + "\t" + matrix.languages[b].str() + "\t" +
               format_fixed(s.score, decimals) + "\n";
      }
    }
  }
  return out;
}

void write_matrix_dir(const SimilarityMatrix& matrix, const std::string& dir) {
  fs::create_directories(dir);
  write_file((fs::path(dir) / "directed.csv").string(), format_matrix_csv(matrix.languages, matrix.directed));
  write_file((fs::path(dir) / "symmetrized.csv").string(), format_matrix_csv(matrix.languages, matrix.symmetrized));
  if (!matrix.per_token.empty()) write_file((fs::path(dir) / "per_token.tsv").string(), format_per_token_tsv(matrix));
}

SimilarityMatrix read_matrix_dir(const std::string& dir) {
  const auto directed = parse_matrix_csv(read_file((fs::path(dir) / "directed.csv").string()));
  SimilarityMatrix m;
  m.languages = directed.languages;
  m.directed = directed.grid;
  const auto sym_path = fs::path(dir) / "symmetrized.csv";
  if (fs::is_regular_file(sym_path)) {
    const auto sym = parse_matrix_csv(read_file(sym_path.string()));
    if (sym.languages != m.languages) throw FormatError("directed.csv and symmetrized.csv list different languages");
    m.symmetrized = sym.grid;
  } else {
    const std::size_t n = m.size();
    m.symmetrized.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) m.symmetrized[a][b] = 0.5 * (m.directed[a][b] + m.directed[b][a]);
    }
  }
  return m;
}

std::string format_self_similarity(const SelfSimilarityDistribution& dist, int decimals) {
  std::string out = "#plsim-selfsim v1 language=" + dist.language.str() +
                    " tokens=" + std::to_string(dist.per_token_scores.size()) +
                    " excluded_singletons=" + std::to_string(dist.excluded_singletons) +
                    " mean=" + format_fixed(dist.mean, decimals) +
                    " variance=" + format_fixed(dist.variance, decimals) + "\n";
  for (const auto& [token, score] : dist.per_token_scores) {
    out += escape_field(token) + "\t" + format_fixed(score, decimals) + "\n";
  }
  return out;
}

SelfSimilarityDistribution parse_self_similarity(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || !lines[0].starts_with("#plsim-selfsim v1")) throw FormatError("not a plsim self-similarity file");
  SelfSimilarityDistribution dist;
  dist.language = LanguageId(header_attribute(lines[0], "language"));
  dist.excluded_singletons = static_cast<std::size_t>(parse_real(header_attribute(lines[0], "excluded_singletons"), "header"));
  dist.mean = parse_real(header_attribute(lines[0], "mean"), "header");
  dist.variance = parse_real(header_attribute(lines[0], "variance"), "header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], '\t');
    const std::string where = "self-similarity line " + std::to_string(i + 1);
    if (cols.size() != 2) throw FormatError(where + ": expected 2 columns");
    if (!dist.per_token_scores.emplace(unescape_field(cols[0]), parse_real(cols[1], where)).second) {
      throw FormatError(where + ": duplicate token");
    }
  }
  return dist;
}

}  // namespace plsim
