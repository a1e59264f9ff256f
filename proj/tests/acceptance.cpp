// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "plsim/encoder.hpp"
#include "plsim/error.hpp"
#include "plsim/lexer.hpp"
#include "plsim/similarity.hpp"
#include "plsim/synth.hpp"
#include "plsim/text.hpp"
#include "plsim/transformer.hpp"
#include "plsim/vocab.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

namespace fs = std::filesystem;
using namespace plsim;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void near(double got, double want, double tol, const std::string& what) {
    const double err = std::abs(got - want);
    worst_ = std::max(worst_, err);
    std::ostringstream os;
    os.precision(12);
    os << what << ": got " << got << " want " << want;
    expect(err <= tol, os.str());
  }
  bool ok() const { return failed_ == 0; }
  double worst() const { return worst_; }
  std::string failures() const {
    std::string s = std::to_string(failed_) + " failure(s)";
    for (const auto& f : failures_) s += "; " + f;
    return s;
  }

 private:
  std::size_t failed_ = 0;
  double worst_ = 0.0;
  std::vector<std::string> failures_;
};

std::string fmt(double v, int decimals = 3) { return format_fixed(v, decimals); }
std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

TokenEmbeddingSet rows(const std::string& tok, std::vector<std::vector<float>> r) {
  return TokenEmbeddingSet::from_rows(tok, r);
}

LanguageRepresentation rep_of(const std::string& lang, std::vector<TokenEmbeddingSet> sets) {
  LanguageRepresentation rep;
  rep.language = LanguageId(lang);
  rep.dim = sets.front().dim;
  for (auto& s : sets) rep.sets.emplace(s.token, std::move(s));
  return rep;
}

// 1 -------------------------------------------------------------------------

Outcome kernel_oracle_equivalence() {
  const auto t0 = Clock::now();
  gen::Rng rng(20240601);
  Check check;
  for (int c = 0; c < 200; ++c) {
    const std::size_t dim = gen::between(rng, 1, 16);
    const std::size_t langs = gen::between(rng, 2, 4);
    std::vector<LanguageRepresentation> reps;
    for (std::size_t l = 0; l < langs; ++l)
      reps.push_back(gen::representation(rng, "l" + std::to_string(l), dim, gen::between(rng, 1, 8), 20));
    const std::string tag = "case " + std::to_string(c);
    for (std::size_t a = 0; a < langs; ++a) {
      for (std::size_t b = 0; b < langs; ++b) {
        bool any_shared = false;
        for (const auto& [t, s] : reps[a].sets) any_shared |= reps[b].sets.contains(t);
        if (!any_shared) continue;
        const double want = oracle::lang_sim(reps[a], reps[b]);
        check.near(language_similarity(reps[a], reps[b], Kernel::Optimized).value, want, 1e-6, tag + " optimized");
        check.near(language_similarity(reps[a], reps[b], Kernel::Strict).value, want, 1e-6, tag + " strict");
      }
    }
    try {
      const auto want = oracle::directed(reps);
      for (Kernel k : {Kernel::Optimized, Kernel::Strict}) {
        const auto m = pairwise_matrix(reps, {k, false, 1});
        for (std::size_t a = 0; a < langs; ++a)
          for (std::size_t b = 0; b < langs; ++b) {
            check.near(m.directed[a][b], want[a][b], 1e-6, tag + " matrix");
            check.near(m.symmetrized[a][b], 0.5 * (want[a][b] + want[b][a]), 1e-6, tag + " symmetrized");
          }
      }
    } catch (const std::invalid_argument&) {
      // some pair shares no token: the kernel must refuse as well
      bool threw = false;
      try {
        pairwise_matrix(reps);
      } catch (const SimilarityError&) {
        threw = true;
      }
      check.expect(threw, tag + " matrix accepted a pair with no shared token");
    }
    for (const auto& rep : reps) {
      const auto want = oracle::self_sim(rep);
      if (want.scores.empty()) continue;
      for (Kernel k : {Kernel::Optimized, Kernel::Strict}) {
        const auto got = self_similarity(rep, k);
        check.expect(got.per_token_scores.size() == want.scores.size(), tag + " self token count");
        check.expect(got.excluded_singletons == want.singletons, tag + " singleton count");
        for (const auto& [t, s] : want.scores) check.near(got.per_token_scores.at(t), s, 1e-6, tag + " self " + t);
      }
    }
  }
  const double secs = seconds_since(t0);
  check.expect(secs < 10.0, "runtime " + fmt(secs) + " s");
  return {check.ok(), check.ok() ? "200 cases, max |err| " + sci(check.worst()) + ", " + fmt(secs) + " s"
                                 : check.failures()};
}

// 2 -------------------------------------------------------------------------

Outcome fixtures() {
  Check check;
  const std::vector<float> e1{1, 0}, e2{0, 1}, d{1, 1};
  check.near(cosine(d, e1), 0.70710678, 1e-8, "cosine([1,1],[1,0])");
  check.near(cosine(e1, e2), 0.0, 1e-8, "cosine orthogonal");
  check.near(cosine(std::vector<float>{3, 4}, std::vector<float>{3, 4}), 1.0, 1e-8, "cosine identical");
  check.near(directed_token_similarity(d, rows("t", {{1, 0}, {0, 1}})), 0.70710678, 1e-8, "max of two cosines");
  check.near(directed_token_similarity(e1, rows("t", {{1, 0}, {0, 1}})), 1.0, 1e-8, "exact member");
  check.near(directed_token_similarity(e1, rows("t", {{0, 1}})), 0.0, 1e-8, "orthogonal target");
  const auto two = rows("t", {{1, 0}, {0, 1}});
  const auto one = rows("t", {{1, 0}});
  check.near(token_set_similarity(two, one), 0.5, 1e-8, "0.5 directed");
  check.near(token_set_similarity(one, two), 1.0, 1e-8, "asymmetry witness");
  check.near(token_set_similarity(two, two), 1.0, 1e-8, "identical sets");
  const auto a = rep_of("a", {rows("p", {{1, 0}, {0, 1}}), rows("q", {{1, 1}})});
  const auto b = rep_of("b", {rows("p", {{1, 0}}), rows("q", {{2, 2}})});
  for (Kernel k : {Kernel::Optimized, Kernel::Oracle, Kernel::Strict}) {
    check.near(language_similarity(a, b, k).value, 0.75, 1e-8, "language mean");
    const auto self = self_similarity(rep_of("s", {rows("o", {{1, 0}, {0, 1}}), rows("i", {{1, 2}, {1, 2}})}), k);
    check.near(self.per_token_scores.at("o"), 0.0, 1e-8, "self-similarity orthogonal pair");
    check.near(self.per_token_scores.at("i"), 1.0, 1e-8, "self-similarity identical pair");
  }
  return {check.ok(), check.ok() ? "all hand values within 1e-8 (max |err| " + sci(check.worst()) + ")"
                                 : check.failures()};
}

// 3 -------------------------------------------------------------------------

Outcome diagonal_law() {
  gen::Rng rng(77);
  Check check;
  std::size_t singletons_seen = 0;
  for (int c = 0; c < 300; ++c) {
    const std::size_t dim = gen::between(rng, 1, 16);
    auto rep = gen::representation(rng, "a", dim, gen::between(rng, 1, 10), 12);
    rep.sets.emplace("solo", gen::set(rng, "solo", dim, 1));
    for (Kernel k : {Kernel::Optimized, Kernel::Oracle, Kernel::Strict}) {
      check.near(language_similarity(rep, rep, k).value, 1.0, 1e-6, "self-inclusive");
      auto copy = rep;
      copy.language = LanguageId("b");
      std::vector<LanguageRepresentation> pair{rep, copy};
      const auto m = pairwise_matrix(pair, {k, false, 1});
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) check.near(m.directed[i][j], 1.0, 1e-6, "diagonal");
      std::size_t singles = 0;
      for (const auto& [t, s] : rep.sets) singles += s.size() == 1;
      if (singles == rep.sets.size()) continue;
      const auto self = self_similarity(rep, k);
      check.expect(self.excluded_singletons == singles, "singletons counted");
      for (const auto& [t, s] : rep.sets)
        if (s.size() == 1) check.expect(!self.per_token_scores.contains(t), "singleton scored");
      for (const auto& [t, v] : self.per_token_scores) check.expect(v <= 1.0 && v >= -1.0, "self score bound");
      singletons_seen += singles;
    }
  }
  return {check.ok(), check.ok() ? "300 representations, " + std::to_string(singletons_seen) +
                                       " singleton exclusions verified, max |1 - diag| " + sci(check.worst())
                                 : check.failures()};
}

// 4 -------------------------------------------------------------------------

LanguageRepresentation scaled(const LanguageRepresentation& rep, gen::Rng& rng) {
  auto out = rep;
  std::uniform_real_distribution<double> exp10(-3.0, 3.0);
  const auto factor = static_cast<float>(std::pow(10.0, exp10(rng)));
  for (auto& [t, s] : out.sets)
    for (auto& x : s.values) x *= factor;
  return out;
}

LanguageRepresentation permuted(const LanguageRepresentation& rep, gen::Rng& rng) {
  std::vector<std::string> keys;
  for (const auto& [t, s] : rep.sets) keys.push_back(t);
  std::shuffle(keys.begin(), keys.end(), rng);
  LanguageRepresentation out;
  out.language = rep.language;
  out.dim = rep.dim;
  for (const auto& k : keys) {
    const auto& s = rep.sets.at(k);
    std::vector<std::size_t> order(s.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    TokenEmbeddingSet p{k, s.dim, {}, {}};
    for (std::size_t i : order) p.add(s.occurrences[i], s.row(i));
    out.sets.emplace(k, std::move(p));
  }
  return out;
}

std::vector<LanguageRepresentation> linked_reps(gen::Rng& rng) {
  const std::size_t dim = gen::between(rng, 1, 16);
  const std::size_t universe = gen::between(rng, 1, 6);
  std::vector<LanguageRepresentation> reps;
  for (const char* l : {"a", "b", "c"}) {
    auto r = gen::representation(rng, l, dim, universe, 10);
    r.sets.try_emplace("t0", gen::set(rng, "t0", dim, 10));
    reps.push_back(std::move(r));
  }
  return reps;
}

Outcome invariance_suite() {
  const auto t0 = Clock::now();
  constexpr int kInstances = 1000;
  gen::Rng rng(4242);
  Check scale, perm, mono, inter;
  double scale_err = 0, perm_err = 0;
  for (int c = 0; c < kInstances; ++c) {
    // positive-scale invariance
    {
      const auto reps = linked_reps(rng);
      std::vector<LanguageRepresentation> s;
      for (const auto& r : reps) s.push_back(scaled(r, rng));
      const auto m0 = pairwise_matrix(reps);
      const auto m1 = pairwise_matrix(s);
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) scale.near(m1.directed[a][b], m0.directed[a][b], 1e-6, "scaled cell");
      if (reps[0].sets.at("t0").size() > 1) {
        scale.near(self_similarity(s[0]).per_token_scores.at("t0"), self_similarity(reps[0]).per_token_scores.at("t0"),
                   1e-6, "scaled self");
      }
    }
    // permutation invariance: vectors within sets, tokens within representations, languages in the input
    {
      const auto reps = linked_reps(rng);
      std::vector<LanguageRepresentation> p;
      for (const auto& r : reps) p.push_back(permuted(r, rng));
      std::shuffle(p.begin(), p.end(), rng);
      const auto m0 = pairwise_matrix(reps);
      const auto m1 = pairwise_matrix(p);
      auto index = [&](const LanguageId& id) {
        return static_cast<std::size_t>(std::find(m1.languages.begin(), m1.languages.end(), id) - m1.languages.begin());
      };
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
          const std::size_t pa = index(m0.languages[a]), pb = index(m0.languages[b]);
          perm.near(m1.directed[pa][pb], m0.directed[a][b], 1e-9, "permuted directed");
          perm.near(m1.symmetrized[pa][pb], m0.symmetrized[a][b], 1e-9, "permuted symmetrized");
        }
    }
    // target-set monotonicity
    {
      const std::size_t dim = gen::between(rng, 1, 16);
      auto target = gen::set(rng, "t", dim, 10);
      const auto source = gen::set(rng, "t", dim, 10);
      std::vector<double> before;
      for (std::size_t i = 0; i < source.size(); ++i) before.push_back(directed_token_similarity(source.row(i), target));
      const double set_before = token_set_similarity(source, target);
      target.add(999, gen::vector(rng, dim));
      for (std::size_t i = 0; i < source.size(); ++i)
        mono.expect(directed_token_similarity(source.row(i), target) >= before[i], "max decreased");
      mono.expect(token_set_similarity(source, target) >= set_before - 1e-15, "set similarity decreased");
    }
    // intersection monotonicity and order invariance
    {
      const std::size_t k = gen::between(rng, 2, 5);
      std::vector<Vocabulary> vs;
      for (std::size_t i = 0; i < k; ++i) vs.push_back(gen::vocabulary(rng, "l" + std::to_string(i), 40));
      const auto base = intersect(vs);
      auto shuffled = vs;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto again = intersect(shuffled);
      inter.expect(again.tokens == base.tokens && again.counts == base.counts, "order changed the intersection");
      auto more = vs;
      more.push_back(gen::vocabulary(rng, "zz", 40));
      const auto smaller = intersect(more);
      inter.expect(std::includes(base.tokens.begin(), base.tokens.end(), smaller.tokens.begin(), smaller.tokens.end()),
                   "adding a language grew the intersection");
      for (const auto& t : base.tokens)
        for (const auto& v : vs) inter.expect(v.counts.contains(t), "intersection token missing from a language");
    }
  }
  scale_err = scale.worst();
  perm_err = perm.worst();
  const double secs = seconds_since(t0);
  Check all;
  all.expect(scale.ok(), "scale: " + scale.failures());
  all.expect(perm.ok(), "permutation: " + perm.failures());
  all.expect(mono.ok(), "monotonicity: " + mono.failures());
  all.expect(inter.ok(), "intersection: " + inter.failures());
  all.expect(secs < 30.0, "runtime " + fmt(secs) + " s");
  return {all.ok(), all.ok() ? std::to_string(kInstances) + " instances per property (4 properties), scale err " +
                                   sci(scale_err) + ", permutation err " + sci(perm_err) + ", " + fmt(secs) + " s"
                             : all.failures()};
}

// 5 -------------------------------------------------------------------------

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

Outcome lexer_snippets() {
  Check check;
  std::map<std::string, int> per_language;
  bool comment_in_string = false, unterminated_comment = false;
  const fs::path root = fs::path(PLSIM_TEST_DATA) / "lexer";
  for (const auto& dir : fs::directory_iterator(root)) {
    const std::string lang = dir.path().filename().string();
    for (const auto& f : fs::directory_iterator(dir.path())) {
      if (f.path().extension() != ".src") continue;
      const std::string name = f.path().stem().string();
      const std::string where = lang + "/" + name;
      comment_in_string |= name.starts_with("comment_in_");
      unterminated_comment |= name.find("unterminated") != std::string::npos && name.find("comment") != std::string::npos;
      ++per_language[lang];
      auto expected_path = f.path();
      expected_path.replace_extension(".tokens");
      const std::string src = read_file(f.path().string());
      std::vector<std::string> want;
      const std::string expected = read_file(expected_path.string());
      for (auto line : split_lines(expected)) {
        const auto tab = line.find('\t');
        want.push_back(std::string(line.substr(0, tab)) + "\t" + unescape_field(line.substr(tab + 1)));
      }
      const auto tokens = tokenize(src, builtin_lexer_spec(lang)).tokens;
      std::vector<std::string> got;
      for (const auto& t : tokens) got.push_back(std::string(to_string(t.kind)) + "\t" + t.lexeme);
      check.expect(got == want, where + ": token stream differs");
      std::size_t pos = 0;
      bool tiles = true;
      for (const auto& t : tokens) {
        tiles &= pos <= t.begin && t.begin < t.end && t.end <= src.size();
        if (!tiles) break;
        for (std::size_t i = pos; i < t.begin; ++i) tiles &= is_space(src[i]);
        tiles &= src.compare(t.begin, t.end - t.begin, t.lexeme) == 0;
        pos = t.end;
      }
      for (std::size_t i = pos; tiles && i < src.size(); ++i) tiles &= is_space(src[i]);
      check.expect(tiles, where + ": reconstruction invariant broken");
    }
  }
  int snippets = 0, thin = 0;
  for (const auto& [lang, n] : per_language) {
    snippets += n;
    thin += n < 5;
  }
  check.expect(per_language.size() >= 8, "only " + std::to_string(per_language.size()) + " specs covered");
  check.expect(thin == 0, std::to_string(thin) + " spec(s) with fewer than 5 snippets");
  check.expect(comment_in_string && unterminated_comment, "missing comment-in-string or unterminated-comment case");
  return {check.ok(), check.ok() ? std::to_string(per_language.size()) + " specs, " + std::to_string(snippets) +
                                       " snippets, exact streams and reconstruction"
                                 : check.failures()};
}

// 6 -------------------------------------------------------------------------

Outcome synthetic_reproduction() {
  const auto t0 = Clock::now();
  const auto& spec = builtin_lexer_spec("c");
  int wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SynthLanguageConfig configs[] = {
        {"a", SynthStyle::Curly, 1000 + seed, 1, 200, 12, 30},
        {"a2", SynthStyle::Curly, 1000 + seed, 2, 200, 12, 30},
        {"b", SynthStyle::List, 2000 + seed, 3, 200, 12, 30},
    };
    std::vector<LanguageCorpus> corpora;
    std::vector<Vocabulary> vocabs;
    for (const auto& c : configs) {
      corpora.push_back(synthetic_corpus(c));
      vocabs.push_back(build_vocabulary(corpora.back(), spec));
    }
    const auto common = intersect(vocabs);
    EncoderConfig enc;
    enc.dim = 64;
    enc.layers = 2;
    enc.steps = 2000;
    enc.seed = seed;
    std::vector<LanguageRepresentation> reps;
    for (const auto& corpus : corpora) {
      const auto encoder = train_encoder(corpus, spec, enc);
      reps.push_back(build_representation(encoder, corpus, spec, common, 50, seed));
    }
    const auto m = pairwise_matrix(reps, {Kernel::Strict, false, 1});
    auto at = [&](const char* id) {
      return static_cast<std::size_t>(std::find(m.languages.begin(), m.languages.end(), LanguageId(id)) -
                                      m.languages.begin());
    };
    const double same = m.symmetrized[at("a")][at("a2")];
    const double other = m.symmetrized[at("a")][at("b")];
    wins += same > other;
    per_seed += " " + fmt(same) + (same > other ? ">" : "<=") + fmt(other);
    std::cerr << "  seed " << seed << ": sim(A,A')=" << fmt(same, 4) << " sim(A,B)=" << fmt(other, 4)
              << " common=" << common.tokens.size() << " elapsed " << fmt(seconds_since(t0), 0) << " s\n";
  }
  const double secs = seconds_since(t0);
  const bool ok = wins >= 9 && secs < 20 * 60;
  return {ok, std::to_string(wins) + "/10 seeds with sim(A,A') > sim(A,B) in " + fmt(secs / 60, 1) + " min;" + per_seed};
}

// 7 -------------------------------------------------------------------------

Outcome gradient_check() {
  nn::TransformerShape shape{16, 12, 2, 3, 24, 8};
  nn::Transformer<double> model(shape);
  std::vector<std::string> pieces;
  for (int i = 0; i < shape.vocab; ++i) pieces.push_back("piece" + std::to_string(i));
  model.initialize(11, pieces);
  std::mt19937_64 rng(13);
  for (auto& p : model.parameters()) p += 0.05 * (static_cast<double>(rng() % 2001) / 1000.0 - 1.0);
  nn::MlmBatch batch;
  batch.batch = 2;
  batch.length = 7;
  for (int i = 0; i < 14; ++i) batch.inputs.push_back(static_cast<int>(rng() % 16));
  batch.target_rows = {0, 3, 8, 13};
  for (int r : batch.target_rows) batch.target_ids.push_back(batch.inputs[r]);

  nn::ParamVector<double> grad(model.parameters().size(), 0.0);
  model.mlm_loss(batch, &grad);
  auto& params = model.parameters();
  const double h = 1e-5;
  double diff2 = 0, num2 = 0, ana2 = 0, worst = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = model.mlm_loss(batch, nullptr);
    params[i] = keep - h;
    const double down = model.mlm_loss(batch, nullptr);
    params[i] = keep;
    const double numeric = (up - down) / (2 * h);
    diff2 += (numeric - grad[i]) * (numeric - grad[i]);
    num2 += numeric * numeric;
    ana2 += grad[i] * grad[i];
    const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-3});
    worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
  }
  const double rel = std::sqrt(diff2) / std::max(std::sqrt(num2), std::sqrt(ana2));
  return {rel <= 1e-3 && worst <= 1e-3, std::to_string(params.size()) + " parameters, relative error " + sci(rel) +
                                            ", worst coordinate " + sci(worst)};
}

// 8 -------------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PLSIM_EXE) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> csv_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".csv")
      out[fs::relative(e.path(), root).string()] = read_file(e.path().string());
  return out;
}

Outcome end_to_end_determinism() {
  const fs::path work = fs::temp_directory_path() / "plsim_acceptance_e2e";
  fs::remove_all(work);
  fs::create_directories(work);
  const SynthLanguageConfig configs[] = {
      {"a", SynthStyle::Curly, 5, 1, 60, 12, 30},
      {"a2", SynthStyle::Curly, 5, 2, 60, 12, 30},
      {"b", SynthStyle::List, 6, 3, 60, 12, 30},
  };
  std::string inputs;
  for (const auto& c : configs) {
    write_synthetic_tree(c, (work / "src" / c.name).string());
    inputs += " --input " + c.name + ":c:" + (work / "src" / c.name).string();
  }
  const std::string common = "run" + inputs + " --strict-fp --steps 150 --samples 20 --seed 3 --train-seed 3";
  for (const char* r : {"run1", "run2"}) {
    if (run_cli(common + " --out " + (work / r).string(), work / (std::string(r) + ".log")) != 0)
      return {false, std::string("plsim run failed, see ") + (work / (std::string(r) + ".log")).string()};
  }
  const auto a = csv_files(work / "run1");
  const auto b = csv_files(work / "run2");
  std::size_t identical = 0;
  std::string differing;
  for (const auto& [path, bytes] : a) {
    const auto it = b.find(path);
    if (it != b.end() && it->second == bytes) ++identical;
    else differing += " " + path;
  }
  const bool ok = !a.empty() && a.size() == b.size() && differing.empty() && a.contains("matrix/directed.csv") &&
                  a.contains("report/symmetrized.csv");
  return {ok, ok ? std::to_string(identical) + " CSV files byte-identical across two --strict-fp runs"
                 : "differing:" + differing};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"kernel-oracle-equivalence", kernel_oracle_equivalence},
      {"similarity-fixtures", fixtures},
      {"diagonal-law", diagonal_law},
      {"invariance-suite", invariance_suite},
      {"lexer-snippets", lexer_snippets},
      {"synthetic-reproduction", synthetic_reproduction},
      {"gradient-check", gradient_check},
      {"end-to-end-determinism", end_to_end_determinism},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.contains(name)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
