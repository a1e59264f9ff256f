#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "plsim/encoder.hpp"
#include "plsim/error.hpp"
#include "plsim/subword.hpp"
#include "plsim/synth.hpp"
#include "plsim/text.hpp"
#include "plsim/transformer.hpp"

namespace fs = std::filesystem;
using namespace plsim;

namespace {

LanguageCorpus tiny_corpus() {
  std::vector<SourceFile> files;
  for (int i = 0; i < 6; ++i) {
    files.push_back({"train" + std::to_string(i),
                     "int total = 0; for (i = 0; i < 10; i++) { total = total + i * " + std::to_string(i) + "; }\n",
                     Partition::Train});
  }
  files.push_back({"test0", "x = alpha + 1; // alpha in a comment\nalpha = x;\n", Partition::Test});
  files.push_back({"test1", "y = alpha * 2;\n", Partition::Test});
  return LanguageCorpus(LanguageId("toy"), files);
}

EncoderConfig tiny_config() {
  EncoderConfig c;
  c.dim = 16;
  c.layers = 1;
  c.heads = 2;
  c.steps = 4;
  c.batch_size = 2;
  c.max_positions = 16;
  c.subword_vocab_size = 300;
  c.warmup_steps = 1;
  c.left_context = 4;
  c.right_context = 4;
  return c;
}

const Encoder& tiny_encoder() {
  static const Encoder enc = train_encoder(tiny_corpus(), builtin_lexer_spec("c"), tiny_config());
  return enc;
}

CommonVocabulary common_of(std::vector<std::string> tokens) {
  CommonVocabulary c;
  c.tokens = std::move(tokens);
  c.languages = {LanguageId("toy"), LanguageId("zz")};
  c.counts.assign(2, std::vector<std::uint64_t>(c.tokens.size(), 1));
  return c;
}

}  // namespace

TEST(Subword, BytesSpecialsAndMerges) {
  SubwordVocabulary base;
  EXPECT_EQ(base.size(), static_cast<std::size_t>(SubwordVocabulary::kFirstMerge));
  EXPECT_EQ(base.encode("ab"), (std::vector<int>{'a', 'b'}));
  const auto v = SubwordVocabulary::train({{"abab", 10}, {"ab", 5}, {"cd", 1}}, 260);
  EXPECT_EQ(v.size(), 260u);
  EXPECT_EQ(v.piece(SubwordVocabulary::kFirstMerge), "ab");
  EXPECT_EQ(v.encode("abab").size(), 1u);
  EXPECT_EQ(v.encode("a b").size(), 2u);
  EXPECT_EQ(SubwordVocabulary::from_merges(v.merges()), v);
  EXPECT_TRUE(v.encode("").empty());
}

TEST(Subword, PiecesConcatenateToTheWords) {
  const auto v = SubwordVocabulary::train({{"return", 9}, {"result", 7}, {"retry", 3}}, 300);
  for (std::string w : {"return", "results", "xyz", "r\xc3\xa9sultat"}) {
    std::string joined;
    for (int id : v.encode(w)) joined += v.piece(id);
    EXPECT_EQ(joined, w);
  }
  EXPECT_EQ(subword_words("a  b\tc").size(), 3u);
}

TEST(Transformer, GradientMatchesFiniteDifferences) {
  nn::TransformerShape shape{12, 8, 2, 2, 16, 6};
  nn::Transformer<double> model(shape);
  std::vector<std::string> pieces;
  for (int i = 0; i < shape.vocab; ++i) pieces.push_back("p" + std::to_string(i));
  model.initialize(3, pieces);
  std::mt19937_64 rng(5);
  for (auto& p : model.parameters()) p += 0.05 * (static_cast<double>(rng() % 2001) / 1000.0 - 1.0);

  nn::MlmBatch batch;
  batch.batch = 2;
  batch.length = 5;
  for (int i = 0; i < 10; ++i) batch.inputs.push_back(static_cast<int>(rng() % 12));
  batch.target_rows = {1, 4, 7};
  batch.target_ids = {3, 9, 0};
  batch.inputs[1] = 2;

  nn::ParamVector<double> grad(model.parameters().size(), 0.0);
  model.mlm_loss(batch, &grad);
  auto& params = model.parameters();
  double num2 = 0, diff2 = 0, ana2 = 0;
  const double h = 1e-5;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = model.mlm_loss(batch, nullptr);
    params[i] = keep - h;
    const double down = model.mlm_loss(batch, nullptr);
    params[i] = keep;
    const double numeric = (up - down) / (2 * h);
    num2 += numeric * numeric;
    ana2 += grad[i] * grad[i];
    diff2 += (numeric - grad[i]) * (numeric - grad[i]);
    EXPECT_LE(std::abs(numeric - grad[i]), 1e-3 * std::max({std::abs(numeric), std::abs(grad[i]), 1e-3})) << i;
  }
  EXPECT_LE(std::sqrt(diff2) / std::max(std::sqrt(num2), std::sqrt(ana2)), 1e-3);
}

TEST(Transformer, SharedPiecesStartIdentical) {
  nn::TransformerShape shape{4, 8, 1, 2, 16, 4};
  nn::Transformer<float> a(shape), b(shape);
  std::vector<std::string> pa{"x", "y", "z", "w"}, pb{"q", "x", "r", "s"};
  a.initialize(9, pa);
  b.initialize(9, pb);
  const auto off = a.offsets().tok_emb;
  for (int k = 0; k < shape.dim; ++k) EXPECT_EQ(a.parameters()[off + k], b.parameters()[off + shape.dim + k]);
  EXPECT_NE(a.parameters()[off], b.parameters()[off]);
}

TEST(Transformer, AdamWDecreasesLoss) {
  nn::TransformerShape shape{10, 8, 1, 2, 16, 4};
  nn::Transformer<float> model(shape);
  std::vector<std::string> pieces(10);
  for (int i = 0; i < 10; ++i) pieces[i] = std::string(1, static_cast<char>('a' + i));
  model.initialize(1, pieces);
  nn::MlmBatch batch{1, 4, {1, 2, 3, 4}, {0, 2}, {5, 6}};
  nn::AdamW<float> opt(model.parameters().size(), nn::matrix_mask(model));
  const float before = model.mlm_loss(batch, nullptr);
  for (int s = 0; s < 30; ++s) {
    nn::ParamVector<float> g(model.parameters().size(), 0.0f);
    model.mlm_loss(batch, &g);
    opt.step(model.parameters(), g, 1e-2);
  }
  EXPECT_LT(model.mlm_loss(batch, nullptr), before);
}

TEST(Sampling, AllOccurrencesWhenFewerThanBudget) {
  const auto corpus = tiny_corpus();
  const auto& spec = builtin_lexer_spec("c");
  const auto s = sample_occurrences(corpus, spec, "alpha", 5, 1, 2, 2);
  ASSERT_EQ(s.size(), 3u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].occurrence, static_cast<std::int64_t>(i));
    EXPECT_EQ(s[i].context[s[i].target_offset], "alpha");
  }
  EXPECT_EQ(s[0].context, (std::vector<std::string>{"x", "=", "alpha", "+", "1"}));
  EXPECT_EQ(s[1].context, (std::vector<std::string>{";", "// alpha in a comment", "alpha", "=", "x"}));
  EXPECT_THROW(sample_occurrences(corpus, spec, "total", 5, 1, 2, 2), EncoderError);
}

TEST(Sampling, SubsetIsDeterministicSortedAndUnique) {
  std::vector<SourceFile> files{{"t", "", Partition::Test}};
  for (int i = 0; i < 200; ++i) files[0].text += "v = v + " + std::to_string(i) + ";\n";
  const LanguageCorpus corpus(LanguageId("toy"), files);
  const auto index = OccurrenceIndex::build(corpus, builtin_lexer_spec("c"));
  EXPECT_EQ(index.count("v"), 400u);
  const auto a = index.sample("v", 50, 7, 3, 3);
  const auto b = index.sample("v", 50, 7, 3, 3);
  const auto c = index.sample("v", 50, 8, 3, 3);
  ASSERT_EQ(a.size(), 50u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a[i - 1].occurrence, a[i].occurrence);
}

TEST(Sampling, SkipsTrainFilesAndUnlexableFiles) {
  std::vector<SourceFile> files{{"a", "q;", Partition::Train}, {"b", std::string("q\0", 2), Partition::Test},
                                {"c", "q q", Partition::Test}};
  const auto index = OccurrenceIndex::build(LanguageCorpus(LanguageId("toy"), files), builtin_lexer_spec("c"));
  EXPECT_EQ(index.count("q"), 2u);
  EXPECT_EQ(index.sample("q", 10, 0, 1, 1)[0].file_index, 2u);
}

TEST(EncoderConfigTest, Validation) {
  EXPECT_NO_THROW(EncoderConfig{}.validate());
  auto c = EncoderConfig{};
  c.heads = 5;
  EXPECT_THROW(c.validate(), EncoderError);
  c = EncoderConfig{};
  c.mask_fraction = 1.0;
  EXPECT_THROW(c.validate(), EncoderError);
  EXPECT_EQ(EncoderConfig{}.ffn_width(), 256);
}

TEST(Encoder, TrainingIsDeterministic) {
  const auto again = train_encoder(tiny_corpus(), builtin_lexer_spec("c"), tiny_config());
  EXPECT_EQ(again.tag(), tiny_encoder().tag());
  EXPECT_EQ(again.model().parameters(), tiny_encoder().model().parameters());
  EXPECT_EQ(tiny_encoder().log().step_losses.size(), 4u);
  EXPECT_TRUE(std::isfinite(tiny_encoder().log().final_loss));
}

TEST(Encoder, CenterTruncationKeepsTheTarget) {
  const auto& enc = tiny_encoder();
  OccurrenceSample s;
  s.token = "alpha";
  for (int i = 0; i < 40; ++i) s.context.push_back("tok" + std::to_string(i));
  s.context[25] = "alpha";
  s.target_offset = 25;
  const auto e = enc.encode_context(s, {});
  EXPECT_TRUE(e.truncated);
  EXPECT_EQ(e.ids.size(), 16u);
  std::string target;
  for (auto i = e.target_begin; i < e.target_end; ++i) target += enc.subwords().piece(e.ids[i]);
  EXPECT_EQ(target, "alpha");
  const auto masked = enc.encode_context(s, {-1, true, Pooling::Mean});
  for (auto i = masked.target_begin; i < masked.target_end; ++i) EXPECT_EQ(masked.ids[i], SubwordVocabulary::kMask);
  std::vector<std::string> diags;
  enc.embed(s, {}, &diags);
  EXPECT_EQ(diags.size(), 1u);
}

TEST(Encoder, MeanPoolingMatchesHiddenStates) {
  const auto& enc = tiny_encoder();
  OccurrenceSample s{"total", 0, 0, 0, {"x", "=", "total", "+", "1"}, 2};
  const auto e = enc.encode_context(s, {});
  ASSERT_GE(e.target_end - e.target_begin, 1u);
  const auto h = enc.model().hidden_states(e.ids, enc.config().layers);
  const auto mean = enc.embed(s);
  const auto first = enc.embed(s, {-1, false, Pooling::First});
  for (int k = 0; k < enc.config().dim; ++k) {
    double sum = 0;
    for (auto i = e.target_begin; i < e.target_end; ++i) sum += h(static_cast<long>(i), k);
    EXPECT_NEAR(mean[k], sum / static_cast<double>(e.target_end - e.target_begin), 1e-6);
    EXPECT_EQ(first[k], h(static_cast<long>(e.target_begin), k));
  }
  EXPECT_NO_THROW(enc.embed(s, {0, false, Pooling::Mean}));
  EXPECT_THROW(enc.embed(s, {5, false, Pooling::Mean}), EncoderError);
}

TEST(Encoder, SaveLoadRoundTrip) {
  const auto path = (fs::path(testing::TempDir()) / "plsim_tiny.ckpt").string();
  tiny_encoder().save(path);
  const auto back = Encoder::load(path);
  EXPECT_EQ(back.tag(), tiny_encoder().tag());
  EXPECT_EQ(back.subwords(), tiny_encoder().subwords());
  EXPECT_EQ(back.model().parameters(), tiny_encoder().model().parameters());
  OccurrenceSample s{"total", 0, 0, 0, {"total", "=", "1"}, 0};
  EXPECT_EQ(back.embed(s), tiny_encoder().embed(s));
  write_file(path, "garbage\n");
  EXPECT_THROW(Encoder::load(path), FormatError);
}

TEST(Encoder, FinetuneStartsFromCheckpoint) {
  auto cfg = tiny_config();
  cfg.steps = 2;
  const auto tuned = train_encoder(tiny_corpus(), builtin_lexer_spec("c"), cfg, &tiny_encoder());
  EXPECT_NE(tuned.tag().find("finetuned"), std::string::npos);
  EXPECT_EQ(tuned.subwords(), tiny_encoder().subwords());
  cfg.dim = 32;
  cfg.heads = 4;
  EXPECT_THROW(train_encoder(tiny_corpus(), builtin_lexer_spec("c"), cfg, &tiny_encoder()), EncoderError);
}

TEST(Representation, TwoTokensAndDropped) {
  const auto rep = build_representation(tiny_encoder(), tiny_corpus(), builtin_lexer_spec("c"),
                                        common_of({"=", "alpha", "total"}), 50, 0);
  EXPECT_EQ(rep.sets.size(), 2u);
  EXPECT_EQ(rep.sets.at("alpha").size(), 3u);
  EXPECT_EQ(rep.sets.at("=").size(), 3u);
  EXPECT_EQ(rep.dropped, (std::vector<std::string>{"total"}));
  EXPECT_EQ(rep.dim, 16u);
  EXPECT_NO_THROW(rep.validate());

  std::vector<OccurrenceSample> samples;
  const auto threaded = build_representation(tiny_encoder(), tiny_corpus(), builtin_lexer_spec("c"),
                                             common_of({"=", "alpha", "total"}), 50, 0, {}, 3, &samples);
  EXPECT_EQ(threaded.sets.at("alpha").values, rep.sets.at("alpha").values);
  EXPECT_EQ(samples.size(), 6u);
}

TEST(Representation, DegenerateWhenNothingOccurs) {
  EXPECT_THROW(build_representation(tiny_encoder(), tiny_corpus(), builtin_lexer_spec("c"),
                                    common_of({"for", "total"}), 50, 0),
               EncoderError);
}
