#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "plsim/corpus.hpp"
#include "plsim/lexer.hpp"
#include "plsim/representation.hpp"
#include "plsim/subword.hpp"
#include "plsim/transformer.hpp"
#include "plsim/vocab.hpp"

namespace plsim {

struct EncoderConfig {
  int dim = 64;
  int layers = 2;
  int heads = 4;
  int ffn = 0;                 // 0 selects 4 * dim
  int left_context = 64;       // lexer tokens
  int right_context = 64;
  int subword_vocab_size = 4096;
  double mask_fraction = 0.15;
  int steps = 2000;
  std::uint64_t seed = 0;
  int max_positions = 64;      // subword positions; also the training window
  int batch_size = 8;
  double learning_rate = 1e-3;
  int warmup_steps = 100;

  void validate() const;
  int ffn_width() const { return ffn > 0 ? ffn : 4 * dim; }
};

/// One appearance of a token in the TEST partition with its lexer-token
/// context window (comments included).
struct OccurrenceSample {
  std::string token;            // vocabulary key
  std::int64_t occurrence = 0;  // index among the token's TEST occurrences
  std::size_t file_index = 0;   // index into the corpus
  std::size_t position = 0;     // token index within the file
  std::vector<std::string> context;
  std::size_t target_offset = 0;

  friend bool operator==(const OccurrenceSample&, const OccurrenceSample&) = default;
};

/// Comment-inclusive token streams of a corpus' TEST files, indexed by the
/// vocabulary key of every non-comment token.
class OccurrenceIndex {
 public:
  static OccurrenceIndex build(const LanguageCorpus& corpus, const LexerSpec& spec);

  std::size_t count(const std::string& token) const;

  /// Up to max_samples occurrences drawn uniformly without replacement under
  /// a per-token sub-seed, returned in corpus order. Throws EncoderError when
  /// the token has no TEST occurrence.
  std::vector<OccurrenceSample> sample(const std::string& token, std::size_t max_samples, std::uint64_t seed,
                                       int left_context, int right_context) const;

 private:
  struct Site {
    std::uint32_t file;
    std::uint32_t position;
  };
  std::vector<std::size_t> corpus_index_;
  std::vector<std::vector<std::string>> lexemes_;
  std::unordered_map<std::string, std::vector<Site>> sites_;
};

std::vector<OccurrenceSample> sample_occurrences(const LanguageCorpus& corpus, const LexerSpec& spec,
                                                 const std::string& token, std::size_t max_samples,
                                                 std::uint64_t seed, int left_context, int right_context);

enum class Pooling { Mean, First };

struct EmbedOptions {
  int layer = -1;  // -1 selects the final normalized layer
  bool masked_target = false;
  Pooling pooling = Pooling::Mean;
};

/// Subword ids of a context window after center truncation.
struct EncodedContext {
  std::vector<int> ids;
  std::size_t target_begin = 0;
  std::size_t target_end = 0;
  bool truncated = false;
};

struct TrainingLog {
  double initial_loss = 0.0;  // on the fixed evaluation batch, before step 1
  double final_loss = 0.0;    // same batch, after the last step
  std::vector<float> step_losses;
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(EncoderConfig config, SubwordVocabulary subwords, nn::Transformer<float> model, std::string tag);

  const EncoderConfig& config() const { return config_; }
  const SubwordVocabulary& subwords() const { return subwords_; }
  const nn::Transformer<float>& model() const { return model_; }
  const std::string& tag() const { return tag_; }
  const TrainingLog& log() const { return log_; }
  void set_log(TrainingLog log) { log_ = std::move(log); }

  EncodedContext encode_context(const OccurrenceSample& sample, const EmbedOptions& options) const;

  /// Final-layer (or selected layer) hidden state at the target, pooled over
  /// its subword pieces, from one unmasked forward pass.
  std::vector<float> embed(const OccurrenceSample& sample, const EmbedOptions& options = {},
                           std::vector<std::string>* diagnostics = nullptr) const;

  void save(const std::string& path) const;
  static Encoder load(const std::string& path);

 private:
  EncoderConfig config_;
  SubwordVocabulary subwords_;
  nn::Transformer<float> model_;
  std::string tag_;
  TrainingLog log_;
};

/// Masked-LM training on the TRAIN partition. With `init`, training starts
/// from that checkpoint's weights and subword vocabulary (finetuning).
Encoder train_encoder(const LanguageCorpus& corpus, const LexerSpec& spec, const EncoderConfig& config,
                      const Encoder* init = nullptr);

inline std::vector<float> embed_occurrence(const Encoder& encoder, const OccurrenceSample& sample,
                                           const EmbedOptions& options = {}) {
  return encoder.embed(sample, options);
}

/// Samples and embeds every common token found in the TEST partition.
/// Tokens with no TEST occurrence land in `dropped`.
LanguageRepresentation build_representation(const Encoder& encoder, const LanguageCorpus& corpus,
                                            const LexerSpec& spec, const CommonVocabulary& common,
                                            std::size_t max_samples, std::uint64_t seed,
                                            const EmbedOptions& options = {}, unsigned threads = 1,
                                            std::vector<OccurrenceSample>* samples_out = nullptr);

}  // namespace plsim
