#include "plsim/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <mutex>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <json.hpp>

#include "plsim/error.hpp"
#include "plsim/parallel.hpp"
#include "plsim/text.hpp"

namespace plsim {

void EncoderConfig::validate() const {
  if (dim <= 0) throw EncoderError("dim must be positive");
  if (layers < 1) throw EncoderError("layers must be at least 1");
  if (heads < 1 || dim % heads != 0) throw EncoderError("heads must divide dim");
  if (left_context < 0 || right_context < 0) throw EncoderError("context sizes must be non-negative");
  if (!(mask_fraction > 0.0 && mask_fraction < 1.0)) throw EncoderError("mask_fraction must lie in (0, 1)");
  if (steps < 1) throw EncoderError("steps must be at least 1");
  if (subword_vocab_size < SubwordVocabulary::kFirstMerge) {
    throw EncoderError("subword_vocab_size must be at least " + std::to_string(SubwordVocabulary::kFirstMerge));
  }
  if (max_positions < 2) throw EncoderError("max_positions must be at least 2");
  if (batch_size < 1) throw EncoderError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw EncoderError("learning_rate must be positive");
  if (warmup_steps < 0) throw EncoderError("warmup_steps must be non-negative");
}

// ---------------------------------------------------------------------------
// Occurrence sampling

OccurrenceIndex OccurrenceIndex::build(const LanguageCorpus& corpus, const LexerSpec& spec) {
  OccurrenceIndex index;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& file = corpus.files()[i];
    if (file.partition != Partition::Test) continue;
    LexResult lexed;
    try {
      lexed = tokenize(file.text, spec);
    } catch (const LexError&) {
      continue;
    }
    const auto f = static_cast<std::uint32_t>(index.lexemes_.size());
    index.corpus_index_.push_back(i);
    std::vector<std::string> lexemes;
    lexemes.reserve(lexed.tokens.size());
    for (std::size_t p = 0; p < lexed.tokens.size(); ++p) {
      const auto& tok = lexed.tokens[p];
      if (tok.kind != TokenKind::Comment) {
        index.sites_[vocabulary_key(tok, spec)].push_back({f, static_cast<std::uint32_t>(p)});
      }
      lexemes.push_back(tok.lexeme);
    }
    index.lexemes_.push_back(std::move(lexemes));
  }
  return index;
}

std::size_t OccurrenceIndex::count(const std::string& token) const {
  const auto it = sites_.find(token);
  return it == sites_.end() ? 0 : it->second.size();
}

std::vector<OccurrenceSample> OccurrenceIndex::sample(const std::string& token, std::size_t max_samples,
                                                      std::uint64_t seed, int left_context,
                                                      int right_context) const {
  const auto it = sites_.find(token);
  if (it == sites_.end() || it->second.empty()) {
    throw EncoderError("token has no occurrence outside comments in the TEST partition: '" + token + "'");
  }
  const auto& sites = it->second;
  std::vector<std::size_t> chosen(sites.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
  if (max_samples < sites.size()) {
    std::mt19937_64 rng(derive_seed(seed, token));
    for (std::size_t i = 0; i < max_samples; ++i) {
      const std::size_t j = i + uniform_below(rng, chosen.size() - i);
      std::swap(chosen[i], chosen[j]);
    }
    chosen.resize(max_samples);
    std::sort(chosen.begin(), chosen.end());
  }
  std::vector<OccurrenceSample> out;
  out.reserve(chosen.size());
  for (const std::size_t occ : chosen) {
    const Site& site = sites[occ];
    const auto& lexemes = lexemes_[site.file];
    const std::size_t lo = site.position >= static_cast<std::size_t>(left_context)
                               ? site.position - static_cast<std::size_t>(left_context)
                               : 0;
    const std::size_t hi = std::min(lexemes.size(), site.position + static_cast<std::size_t>(right_context) + 1);
    OccurrenceSample s;
    s.token = token;
    s.occurrence = static_cast<std::int64_t>(occ);
    s.file_index = corpus_index_[site.file];
    s.position = site.position;
    s.context.assign(lexemes.begin() + static_cast<long>(lo), lexemes.begin() + static_cast<long>(hi));
    s.target_offset = site.position - lo;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<OccurrenceSample> sample_occurrences(const LanguageCorpus& corpus, const LexerSpec& spec,
                                                 const std::string& token, std::size_t max_samples,
                                                 std::uint64_t seed, int left_context, int right_context) {
  return OccurrenceIndex::build(corpus, spec).sample(token, max_samples, seed, left_context, right_context);
}

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(EncoderConfig config, SubwordVocabulary subwords, nn::Transformer<float> model, std::string tag)
    : config_(std::move(config)), subwords_(std::move(subwords)), model_(std::move(model)), tag_(std::move(tag)) {}

EncodedContext Encoder::encode_context(const OccurrenceSample& sample, const EmbedOptions& options) const {
  if (sample.target_offset >= sample.context.size()) throw EncoderError("sample target offset outside its context");
  EncodedContext enc;
  std::vector<int> ids;
  std::size_t tb = 0, te = 0;
  for (std::size_t i = 0; i < sample.context.size(); ++i) {
    if (i == sample.target_offset) tb = ids.size();
    const auto pieces = subwords_.encode(sample.context[i]);
    ids.insert(ids.end(), pieces.begin(), pieces.end());
    if (i == sample.target_offset) te = ids.size();
  }
  if (te == tb) throw EncoderError("target token '" + sample.token + "' encodes to no subword pieces");
  if (options.masked_target) std::fill(ids.begin() + static_cast<long>(tb), ids.begin() + static_cast<long>(te), SubwordVocabulary::kMask);

  const auto capacity = static_cast<std::size_t>(model_.shape().max_positions);
  std::size_t lo = 0, hi = ids.size();
  if (ids.size() > capacity) {
    enc.truncated = true;
    const std::size_t target_len = te - tb;
    if (target_len >= capacity) {
      lo = tb;
      hi = tb + capacity;
    } else {
      const std::size_t spare = capacity - target_len;
      std::size_t left = std::min(tb, spare / 2);
      const std::size_t right = std::min(ids.size() - te, spare - left);
      left = std::min(tb, spare - right);
      lo = tb - left;
      hi = te + right;
    }
  }
  enc.ids.assign(ids.begin() + static_cast<long>(lo), ids.begin() + static_cast<long>(hi));
  enc.target_begin = tb - lo;
  enc.target_end = std::min(te, hi) - lo;
  return enc;
}

std::vector<float> Encoder::embed(const OccurrenceSample& sample, const EmbedOptions& options,
                                  std::vector<std::string>* diagnostics) const {
  const int layers = model_.shape().layers;
  const int layer = options.layer < 0 ? layers : options.layer;
  if (layer > layers) throw EncoderError("requested layer " + std::to_string(layer) + " exceeds model depth");
  const EncodedContext enc = encode_context(sample, options);
  if (enc.truncated && diagnostics) {
    diagnostics->push_back("context of '" + sample.token + "' occurrence " + std::to_string(sample.occurrence) +
                           " center-truncated to " + std::to_string(enc.ids.size()) + " pieces");
  }
  const auto hidden = model_.hidden_states(enc.ids, layer);
  const auto tb = static_cast<Eigen::Index>(enc.target_begin);
  const auto te = static_cast<Eigen::Index>(enc.target_end);
  Eigen::RowVectorXd pooled;
  if (options.pooling == Pooling::First) {
    pooled = hidden.row(tb).cast<double>();
  } else {
    pooled = hidden.middleRows(tb, te - tb).cast<double>().colwise().sum() / static_cast<double>(te - tb);
  }
  std::vector<float> out(static_cast<std::size_t>(pooled.size()));
  for (Eigen::Index k = 0; k < pooled.size(); ++k) out[static_cast<std::size_t>(k)] = static_cast<float>(pooled(k));
  return out;
}

namespace {

constexpr std::string_view kCheckpointMagic = "PLSIM-CHECKPOINT v1";

nlohmann::ordered_json config_to_json(const EncoderConfig& c) {
  return {{"dim", c.dim},
          {"layers", c.layers},
          {"heads", c.heads},
          {"ffn", c.ffn},
          {"left_context", c.left_context},
          {"right_context", c.right_context},
          {"subword_vocab_size", c.subword_vocab_size},
          {"mask_fraction", c.mask_fraction},
          {"steps", c.steps},
          {"seed", c.seed},
          {"max_positions", c.max_positions},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"warmup_steps", c.warmup_steps}};
}

EncoderConfig config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.dim = j.at("dim");
  c.layers = j.at("layers");
  c.heads = j.at("heads");
  c.ffn = j.at("ffn");
  c.left_context = j.at("left_context");
  c.right_context = j.at("right_context");
  c.subword_vocab_size = j.at("subword_vocab_size");
  c.mask_fraction = j.at("mask_fraction");
  c.steps = j.at("steps");
  c.seed = j.at("seed");
  c.max_positions = j.at("max_positions");
  c.batch_size = j.at("batch_size");
  c.learning_rate = j.at("learning_rate");
  c.warmup_steps = j.at("warmup_steps");
  return c;
}

}  // namespace

void Encoder::save(const std::string& path) const {
  std::ostringstream out;
  out << kCheckpointMagic << "\n";
  nlohmann::ordered_json header;
  header["tag"] = tag_;
  header["config"] = config_to_json(config_);
  header["vocab"] = model_.shape().vocab;
  header["initial_loss"] = log_.initial_loss;
  header["final_loss"] = log_.final_loss;
  header["merges"] = subwords_.merges().size();
  header["parameters"] = model_.parameters().size();
  out << header.dump() << "\n";
  for (const auto& [a, b] : subwords_.merges()) out << a << " " << b << "\n";
  const auto& params = model_.parameters();
  out.write(reinterpret_cast<const char*>(params.data()), static_cast<std::streamsize>(params.size() * sizeof(float)));
  write_file(path, out.str());
}

Encoder Encoder::load(const std::string& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto next_line = [&]() {
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw FormatError("truncated checkpoint: " + path);
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != kCheckpointMagic) throw FormatError("not a plsim checkpoint: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(next_line());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad checkpoint header: " + std::string(e.what()));
  }
  const EncoderConfig config = config_from_json(header.at("config"));
  config.validate();
  std::vector<std::pair<int, int>> merges;
  const std::size_t merge_count = header.at("merges");
  for (std::size_t i = 0; i < merge_count; ++i) {
    std::istringstream line(next_line());
    int a = 0, b = 0;
    if (!(line >> a >> b)) throw FormatError("bad merge record in checkpoint");
    merges.emplace_back(a, b);
  }
  auto subwords = SubwordVocabulary::from_merges(merges);
  nn::TransformerShape shape{static_cast<int>(subwords.size()), config.dim, config.layers, config.heads,
                             config.ffn_width(), config.max_positions};
  if (header.at("vocab").get<int>() != shape.vocab) throw FormatError("checkpoint vocabulary size mismatch");
  nn::Transformer<float> model(shape);
  const std::size_t count = header.at("parameters");
  if (count != model.parameters().size() || bytes.size() - pos != count * sizeof(float)) {
    throw FormatError("checkpoint parameter block has the wrong size");
  }
  std::memcpy(model.parameters().data(), bytes.data() + pos, count * sizeof(float));
  Encoder enc(config, std::move(subwords), std::move(model), header.at("tag"));
  TrainingLog log;
  log.initial_loss = header.at("initial_loss");
  log.final_loss = header.at("final_loss");
  enc.set_log(std::move(log));
  return enc;
}

// ---------------------------------------------------------------------------
// Training

namespace {

double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

nn::MlmBatch make_batch(const std::vector<int>& stream, std::mt19937_64& rng, const EncoderConfig& config,
                        int vocab) {
  nn::MlmBatch batch;
  batch.batch = config.batch_size;
  batch.length = config.max_positions;
  const auto length = static_cast<std::size_t>(config.max_positions);
  const std::size_t starts = stream.size() - length + 1;
  for (int b = 0; b < batch.batch; ++b) {
    const std::size_t start = uniform_below(rng, starts);
    batch.inputs.insert(batch.inputs.end(), stream.begin() + static_cast<long>(start),
                        stream.begin() + static_cast<long>(start + length));
  }
  const auto regular = static_cast<std::uint64_t>(vocab - 2);  // ids other than the two specials
  auto random_id = [&]() {
    const auto r = static_cast<int>(uniform_below(rng, regular));
    return r < SubwordVocabulary::kMask ? r : r + 2;
  };
  for (std::size_t r = 0; r < batch.inputs.size(); ++r) {
    const int original = batch.inputs[r];
    if (original == SubwordVocabulary::kSep) continue;
    if (unit_real(rng) >= config.mask_fraction) continue;
    batch.target_rows.push_back(static_cast<int>(r));
    batch.target_ids.push_back(original);
    const double u = unit_real(rng);
    if (u < 0.8) batch.inputs[r] = SubwordVocabulary::kMask;
    else if (u < 0.9) batch.inputs[r] = random_id();
  }
  if (batch.target_rows.empty()) {
    const auto r = uniform_below(rng, batch.inputs.size());
    batch.target_rows.push_back(static_cast<int>(r));
    batch.target_ids.push_back(batch.inputs[r]);
    batch.inputs[r] = SubwordVocabulary::kMask;
  }
  return batch;
}

double scheduled_lr(const EncoderConfig& c, int step) {
  if (c.warmup_steps > 0 && step < c.warmup_steps) {
    return c.learning_rate * static_cast<double>(step + 1) / static_cast<double>(c.warmup_steps);
  }
  const double span = std::max(1, c.steps - c.warmup_steps);
  const double progress = static_cast<double>(step - c.warmup_steps) / span;
  return c.learning_rate * std::max(0.0, 1.0 - progress);
}

// Keeps the per-step buffers on the heap instead of mapping them anew each step.
void keep_heap_resident() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
  });
#endif
}

std::string hex64(std::uint64_t v) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kHex[v & 15];
  return s;
}

}  // namespace

Encoder train_encoder(const LanguageCorpus& corpus, const LexerSpec& spec, const EncoderConfig& config,
                      const Encoder* init) {
  config.validate();
  keep_heap_resident();
  if (corpus.train_count() == 0) throw EncoderError("train partition of " + corpus.language().str() + " is empty");

  std::vector<std::vector<std::string>> files;
  for (const auto& file : corpus.files()) {
    if (file.partition != Partition::Train) continue;
    try {
      const auto lexed = tokenize(file.text, spec);
      std::vector<std::string> lexemes;
      lexemes.reserve(lexed.tokens.size());
      for (const auto& t : lexed.tokens) lexemes.push_back(t.lexeme);
      files.push_back(std::move(lexemes));
    } catch (const LexError&) {
    }
  }

  SubwordVocabulary subwords;
  if (init) {
    subwords = init->subwords();
  } else {
    std::map<std::string, std::uint64_t> words;
    for (const auto& lexemes : files) {
      for (const auto& lx : lexemes) {
        for (auto w : subword_words(lx)) ++words[std::string(w)];
      }
    }
    subwords = SubwordVocabulary::train(words, static_cast<std::size_t>(config.subword_vocab_size));
  }

  std::vector<int> stream;
  {
    std::unordered_map<std::string, std::vector<int>> cache;
    for (const auto& lexemes : files) {
      for (const auto& lx : lexemes) {
        auto [it, inserted] = cache.try_emplace(lx);
        if (inserted) it->second = subwords.encode(lx);
        stream.insert(stream.end(), it->second.begin(), it->second.end());
      }
      stream.push_back(SubwordVocabulary::kSep);
    }
  }
  if (stream.size() < static_cast<std::size_t>(config.max_positions)) {
    throw EncoderError("train corpus smaller than one batch: " + std::to_string(stream.size()) +
                       " subword pieces, need " + std::to_string(config.max_positions));
  }

  const nn::TransformerShape shape{static_cast<int>(subwords.size()), config.dim, config.layers, config.heads,
                                   config.ffn_width(), config.max_positions};
  nn::Transformer<float> model(shape);
  if (init) {
    if (!(init->model().shape() == shape)) throw EncoderError("finetune config does not match checkpoint shape");
    model.parameters() = init->model().parameters();
  } else {
    std::vector<std::string> pieces;
    for (std::size_t i = 0; i < subwords.size(); ++i) pieces.push_back(subwords.piece(static_cast<int>(i)));
    model.initialize(config.seed, pieces);
  }

  std::mt19937_64 eval_rng(derive_seed(config.seed, "mlm-eval"));
  const nn::MlmBatch eval_batch = make_batch(stream, eval_rng, config, shape.vocab);
  std::mt19937_64 rng(derive_seed(config.seed, "mlm-train"));

  TrainingLog log;
  log.initial_loss = model.mlm_loss(eval_batch, nullptr);
  log.step_losses.reserve(static_cast<std::size_t>(config.steps));
  nn::AdamW<float> optimizer(model.parameters().size(), nn::matrix_mask(model));
  nn::ParamVector<float> grad(model.parameters().size());
  constexpr double kClipNorm = 1.0;
  for (int step = 0; step < config.steps; ++step) {
    const nn::MlmBatch batch = make_batch(stream, rng, config, shape.vocab);
    std::fill(grad.begin(), grad.end(), 0.0f);
    log.step_losses.push_back(model.mlm_loss(batch, &grad));
    double norm2 = 0.0;
    for (float g : grad) norm2 += static_cast<double>(g) * g;
    const double norm = std::sqrt(norm2);
    if (norm > kClipNorm) {
      const auto s = static_cast<float>(kClipNorm / norm);
      for (float& g : grad) g *= s;
    }
    optimizer.step(model.parameters(), grad, scheduled_lr(config, step));
  }
  log.final_loss = model.mlm_loss(eval_batch, nullptr);

  const auto& params = model.parameters();
  const std::uint64_t digest = fnv1a64(std::string_view(reinterpret_cast<const char*>(params.data()),
                                                        params.size() * sizeof(float)));
  std::string tag = "plsim-mlm/" + corpus.language().str() + (init ? "/finetuned:" + init->tag() : "") +
                    "/seed" + std::to_string(config.seed) + "/" + hex64(digest);
  Encoder encoder(config, std::move(subwords), std::move(model), std::move(tag));
  encoder.set_log(std::move(log));
  return encoder;
}

// ---------------------------------------------------------------------------
// Representation

LanguageRepresentation build_representation(const Encoder& encoder, const LanguageCorpus& corpus,
                                            const LexerSpec& spec, const CommonVocabulary& common,
                                            std::size_t max_samples, std::uint64_t seed,
                                            const EmbedOptions& options, unsigned threads,
                                            std::vector<OccurrenceSample>* samples_out) {
  if (max_samples == 0) throw EncoderError("max_samples must be positive");
  const OccurrenceIndex index = OccurrenceIndex::build(corpus, spec);
  const auto& cfg = encoder.config();
  const std::size_t n = common.tokens.size();

  struct Slot {
    std::vector<OccurrenceSample> samples;
    TokenEmbeddingSet set;
    std::vector<std::string> diagnostics;
  };
  std::vector<Slot> slots(n);
  parallel_for(n, threads, [&](std::size_t t) {
    const std::string& token = common.tokens[t];
    Slot& slot = slots[t];
    slot.set.token = token;
    slot.set.dim = static_cast<std::size_t>(cfg.dim);
    if (index.count(token) == 0) return;
    slot.samples = index.sample(token, max_samples, seed, cfg.left_context, cfg.right_context);
    for (const auto& s : slot.samples) {
      const auto vec = encoder.embed(s, options, &slot.diagnostics);
      if (std::all_of(vec.begin(), vec.end(), [](float x) { return x == 0.0f; })) {
        slot.diagnostics.push_back("dropped all-zero embedding of '" + token + "' occurrence " +
                                   std::to_string(s.occurrence));
        continue;
      }
      slot.set.add(s.occurrence, vec);
    }
  });

  LanguageRepresentation rep;
  rep.language = corpus.language();
  rep.encoder_tag = encoder.tag();
  rep.dim = static_cast<std::size_t>(cfg.dim);
  for (std::size_t t = 0; t < n; ++t) {
    Slot& slot = slots[t];
    rep.diagnostics.insert(rep.diagnostics.end(), slot.diagnostics.begin(), slot.diagnostics.end());
    if (samples_out) samples_out->insert(samples_out->end(), slot.samples.begin(), slot.samples.end());
    if (slot.set.empty()) {
      rep.dropped.push_back(common.tokens[t]);
    } else {
      rep.sets.emplace(common.tokens[t], std::move(slot.set));
    }
  }
  if (rep.sets.empty()) {
    throw EncoderError("degenerate representation for " + corpus.language().str() +
                       ": no common token occurs in the TEST partition");
  }
  return rep;
}

}  // namespace plsim
