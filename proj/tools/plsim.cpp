#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plsim/archive.hpp"
#include "plsim/corpus.hpp"
#include "plsim/encoder.hpp"
#include "plsim/error.hpp"
#include "plsim/lexer.hpp"
#include "plsim/pipeline.hpp"
#include "plsim/report.hpp"
#include "plsim/similarity.hpp"
#include "plsim/synth.hpp"
#include "plsim/text.hpp"
#include "plsim/vocab.hpp"

namespace fs = std::filesystem;
using namespace plsim;

namespace {

std::optional<std::size_t> parse_max_files(const std::string& s) {
  if (s == "inf") return std::nullopt;
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("--max-files expects an integer or 'inf'");
  return v;
}

void add_encoder_options(CLI::App* cmd, EncoderConfig& c) {
  cmd->add_option("--dim", c.dim, "hidden width")->capture_default_str();
  cmd->add_option("--layers", c.layers, "transformer blocks")->capture_default_str();
  cmd->add_option("--heads", c.heads, "attention heads")->capture_default_str();
  cmd->add_option("--ffn", c.ffn, "feed-forward width (0 = 4 * dim)")->capture_default_str();
  cmd->add_option("--steps", c.steps, "optimizer steps")->capture_default_str();
  cmd->add_option("--train-seed", c.seed, "initialization and batch seed")->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size, "sequences per step")->capture_default_str();
  cmd->add_option("--max-positions", c.max_positions, "subword window length")->capture_default_str();
  cmd->add_option("--lr", c.learning_rate, "peak learning rate")->capture_default_str();
  cmd->add_option("--warmup", c.warmup_steps, "linear warmup steps")->capture_default_str();
  cmd->add_option("--mask-fraction", c.mask_fraction, "masked-LM target fraction")->capture_default_str();
  cmd->add_option("--subword-vocab", c.subword_vocab_size, "byte-pair vocabulary size")->capture_default_str();
  cmd->add_option("--left-context", c.left_context, "lexer tokens left of a sampled target")->capture_default_str();
  cmd->add_option("--right-context", c.right_context, "lexer tokens right of a sampled target")->capture_default_str();
}

struct EmbedFlags {
  std::string layer = "last";
  bool masked = false;
  std::string pooling = "mean";

  EmbedOptions options() const {
    EmbedOptions o;
    if (layer != "last") o.layer = std::stoi(layer);
    o.masked_target = masked;
    if (pooling == "first") o.pooling = Pooling::First;
    else if (pooling != "mean") throw Error("--pooling expects mean or first");
    return o;
  }
};

void add_embed_options(CLI::App* cmd, EmbedFlags& f) {
  cmd->add_option("--layer", f.layer, "hidden layer index, or 'last' for the final normalized output")
      ->capture_default_str();
  cmd->add_flag("--masked-target", f.masked, "replace the target pieces with [MASK] before the forward pass");
  cmd->add_option("--pooling", f.pooling, "mean or first subword piece")->capture_default_str();
}

Kernel pick_kernel(bool oracle, bool strict) {
  if (oracle && strict) throw Error("--oracle and --strict-fp are mutually exclusive");
  return oracle ? Kernel::Oracle : strict ? Kernel::Strict : Kernel::Optimized;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plsim: cross-language token representation similarity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "plsim 0.1.0");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "read a language's source files into a corpus directory");
  std::string language, root, manifest_path, max_files = "inf", out;
  double train_fraction = 0.9;
  std::string manifest_out;
  ingest_cmd->add_option("--language", language, "language id")->required();
  auto* root_opt = ingest_cmd->add_option("--root", root, "directory to scan recursively");
  auto* manifest_opt = ingest_cmd->add_option("--manifest", manifest_path, "manifest file");
  root_opt->excludes(manifest_opt);
  ingest_cmd->add_option("--max-files", max_files, "file cap, integer or inf")->capture_default_str();
  ingest_cmd->add_option("--train-fraction", train_fraction, "leading share of files used for training")
      ->capture_default_str();
  ingest_cmd->add_option("--write-manifest", manifest_out, "also write the effective manifest here");
  ingest_cmd->add_option("--out", out, "corpus directory")->required();

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "token statistics of a corpus");
  std::string corpus_dir, spec_name;
  stats_cmd->add_option("--corpus", corpus_dir)->required();
  stats_cmd->add_option("--spec", spec_name, "builtin lexer name or spec file")->required();

  // lex
  auto* lex_cmd = app.add_subcommand("lex", "tokenize one file");
  std::string source_path, format = "tsv";
  bool strip = false;
  lex_cmd->add_option("--spec", spec_name, "builtin lexer name or spec file")->required();
  lex_cmd->add_option("source", source_path, "source file")->required();
  lex_cmd->add_flag("--strip-comments", strip, "drop COMMENT tokens");
  lex_cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"tsv"}))->capture_default_str();

  // lexspec
  auto* spec_cmd = app.add_subcommand("lexspec", "print a lexer spec or list the builtin ones");
  bool list_specs = false;
  spec_cmd->add_option("--spec", spec_name, "builtin lexer name or spec file");
  spec_cmd->add_flag("--list", list_specs, "list builtin specs");

  // vocab
  auto* vocab_cmd = app.add_subcommand("vocab", "count the comment-free token vocabulary of a corpus");
  std::string kinds;
  vocab_cmd->add_option("--corpus", corpus_dir)->required();
  vocab_cmd->add_option("--spec", spec_name)->required();
  vocab_cmd->add_option("--kinds", kinds, "comma-separated token kinds to admit");
  vocab_cmd->add_option("--out", out)->required();

  // common
  auto* common_cmd = app.add_subcommand("common", "intersect vocabularies");
  std::vector<std::string> vocab_files;
  common_cmd->add_option("--vocab", vocab_files, "vocabulary files")->required()->expected(2, -1);
  common_cmd->add_option("--out", out)->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a masked-LM encoder on a corpus' TRAIN partition");
  EncoderConfig enc_config;
  std::string init_path;
  train_cmd->add_option("--corpus", corpus_dir)->required();
  train_cmd->add_option("--spec", spec_name)->required();
  train_cmd->add_option("--init", init_path, "checkpoint to finetune from");
  train_cmd->add_option("--out", out, "checkpoint path")->required();
  add_encoder_options(train_cmd, enc_config);

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "embed sampled TEST occurrences of the common tokens");
  std::string encoder_path, tokens_path, samples_out;
  std::size_t samples = 50;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  EmbedFlags embed_flags;
  embed_cmd->add_option("--encoder", encoder_path, "checkpoint")->required();
  embed_cmd->add_option("--corpus", corpus_dir)->required();
  embed_cmd->add_option("--spec", spec_name)->required();
  embed_cmd->add_option("--tokens", tokens_path, "common vocabulary file")->required();
  embed_cmd->add_option("--samples", samples, "occurrences per token")->capture_default_str();
  embed_cmd->add_option("--seed", seed, "sampling seed")->capture_default_str();
  embed_cmd->add_option("--out", out, "lrep archive")->required();
  embed_cmd->add_option("--export-samples", samples_out, "write the sampled occurrences")
      ->expected(0, 1)
      ->default_str("");
  embed_cmd->add_option("--threads", threads)->capture_default_str();
  add_embed_options(embed_cmd, embed_flags);

  // sim
  auto* sim_cmd = app.add_subcommand("sim", "pairwise language similarity of archives");
  std::vector<std::string> archives;
  bool oracle = false, strict = false;
  sim_cmd->add_option("--archives", archives, "lrep archives")->required()->expected(2, -1);
  sim_cmd->add_option("--out", out, "matrix directory")->required();
  sim_cmd->add_flag("--oracle", oracle, "brute-force kernel");
  sim_cmd->add_flag("--strict-fp", strict, "fixed-order scalar kernel");
  sim_cmd->add_option("--threads", threads)->capture_default_str();

  // selfsim
  auto* self_cmd = app.add_subcommand("selfsim", "self-similarity distribution of one archive");
  std::string archive_path;
  self_cmd->add_option("--archive", archive_path)->required();
  self_cmd->add_option("--out", out, "output file (default: stdout)");
  self_cmd->add_flag("--oracle", oracle, "brute-force kernel");
  self_cmd->add_flag("--strict-fp", strict, "fixed-order scalar kernel");

  // report
  auto* report_cmd = app.add_subcommand("report", "sorted matrices, heatmap and self-similarity summary");
  std::string matrix_dir, sort = "average";
  std::vector<std::string> self_files, compare_files;
  ReportConfig report_config;
  report_cmd->add_option("--matrix", matrix_dir, "directory written by 'plsim sim'")->required();
  report_cmd->add_option("--self", self_files, "self-similarity files");
  report_cmd->add_option("--compare", compare_files, "self-similarity files of a second run for delta columns");
  report_cmd->add_option("--out", out)->required();
  report_cmd->add_option("--sort", sort)->check(CLI::IsMember({"average", "input"}))->capture_default_str();
  report_cmd->add_flag("--abs-scale", report_config.absolute_scale, "color over [-1, 1]");
  report_cmd->add_option("--decimals", report_config.decimals)->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic toy language");
  SynthLanguageConfig synth_config;
  std::string style = "curly";
  synth_cmd->add_option("--name", synth_config.name)->required();
  synth_cmd->add_option("--style", style)->check(CLI::IsMember({"curly", "list"}))->capture_default_str();
  synth_cmd->add_option("--grammar-seed", synth_config.grammar_seed)->capture_default_str();
  synth_cmd->add_option("--corpus-seed", synth_config.corpus_seed)->capture_default_str();
  synth_cmd->add_option("--files", synth_config.files)->capture_default_str();
  synth_cmd->add_option("--out", out)->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "the whole pipeline from source trees to report");
  std::vector<std::string> inputs;
  PipelineConfig pipeline;
  run_cmd->add_option("--input", inputs, "language:lexer:source (directory or manifest)")
      ->required()
      ->expected(2, -1);
  run_cmd->add_option("--out", out)->required();
  run_cmd->add_option("--max-files", max_files)->capture_default_str();
  run_cmd->add_option("--train-fraction", pipeline.train_fraction)->capture_default_str();
  run_cmd->add_option("--samples", pipeline.samples)->capture_default_str();
  run_cmd->add_option("--seed", pipeline.seed, "sampling seed")->capture_default_str();
  run_cmd->add_flag("--strict-fp", pipeline.strict_fp, "fixed-order scalar similarity kernel");
  run_cmd->add_option("--threads", pipeline.threads)->capture_default_str();
  add_encoder_options(run_cmd, pipeline.encoder);
  add_embed_options(run_cmd, embed_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) {
      const LanguageId id(language);
      CorpusManifest manifest;
      if (!manifest_path.empty()) {
        manifest = parse_manifest(read_file(manifest_path));
        if (manifest.language != id) throw CorpusError("manifest language " + manifest.language.str() + " differs from --language " + language);
      } else if (!root.empty()) {
        manifest = scan_directory(id, root);
      } else {
        throw Error("ingest needs --root or --manifest");
      }
      if (ingest_cmd->count("--max-files")) manifest.max_files = parse_max_files(max_files);
      if (!manifest_out.empty()) write_file(manifest_out, format_manifest(manifest));
      const auto corpus = split(ingest(manifest), train_fraction);
      save_corpus(corpus, out);
      for (const auto& d : corpus.diagnostics()) std::cerr << "warning: " << d.path << ": " << d.message << '\n';
      std::cout << language << ": " << corpus.size() << " files (" << corpus.train_count() << " train, "
                << corpus.test_count() << " test)\n";
    } else if (*stats_cmd) {
      const auto stats = compute_stats(load_corpus(corpus_dir), load_lexer_spec(spec_name));
      std::cout << "language\t" << stats.language.str() << "\nfiles\t" << stats.file_count << "\ntokens\t"
                << stats.token_count << "\ncomment_tokens\t" << stats.comment_token_count << "\nskipped\t"
                << stats.skipped.size() << '\n';
      for (const auto& d : stats.skipped) std::cerr << "skipped: " << d.path << ": " << d.message << '\n';
    } else if (*lex_cmd) {
      const auto spec = load_lexer_spec(spec_name);
      auto result = tokenize(read_file(source_path), spec);
      if (strip) result.tokens = strip_comments(result.tokens);
      std::string text;
      for (const auto& t : result.tokens) {
        text += std::string(to_string(t.kind)) + "\t" + std::to_string(t.begin) + "\t" + std::to_string(t.end) +
                "\t" + escape_field(t.lexeme) + "\n";
      }
      std::cout << text;
      for (const auto& d : result.diagnostics) {
        std::cerr << "warning: " << source_path << ":" << d.line << ": " << d.message << '\n';
      }
    } else if (*spec_cmd) {
      if (list_specs) {
        for (const auto& name : builtin_lexer_languages()) std::cout << name << '\n';
      } else if (!spec_name.empty()) {
        std::cout << to_text(load_lexer_spec(spec_name));
      } else {
        throw Error("lexspec needs --spec or --list");
      }
    } else if (*vocab_cmd) {
      const KindFilter filter = kinds.empty() ? KindFilter{} : KindFilter::parse(kinds);
      const auto vocab = build_vocabulary(load_corpus(corpus_dir), load_lexer_spec(spec_name), filter);
      write_file(out, format_vocabulary(vocab));
      for (const auto& d : vocab.skipped) std::cerr << "skipped: " << d.path << ": " << d.message << '\n';
      std::cout << vocab.language.str() << ": " << vocab.counts.size() << " distinct tokens\n";
    } else if (*common_cmd) {
      std::vector<Vocabulary> vocabs;
      for (const auto& f : vocab_files) vocabs.push_back(parse_vocabulary(read_file(f)));
      const auto common = intersect(vocabs);
      write_file(out, format_common_vocabulary(common));
      std::cout << common.tokens.size() << " common tokens\n";
    } else if (*train_cmd) {
      const auto corpus = load_corpus(corpus_dir);
      std::optional<Encoder> init;
      if (!init_path.empty()) init = Encoder::load(init_path);
      const auto encoder = train_encoder(corpus, load_lexer_spec(spec_name), enc_config, init ? &*init : nullptr);
      encoder.save(out);
      std::cout << encoder.tag() << "\ninitial_loss\t" << format_fixed(encoder.log().initial_loss, 6)
                << "\nfinal_loss\t" << format_fixed(encoder.log().final_loss, 6) << '\n';
    } else if (*embed_cmd) {
      const auto encoder = Encoder::load(encoder_path);
      const auto corpus = load_corpus(corpus_dir);
      const auto common = parse_common_vocabulary(read_file(tokens_path));
      std::vector<OccurrenceSample> sampled;
      const auto rep = build_representation(encoder, corpus, load_lexer_spec(spec_name), common, samples, seed,
                                            embed_flags.options(), threads, &sampled);
      export_archive(rep, out);
      if (embed_cmd->count("--export-samples")) {
        const std::string path = samples_out.empty() ? out + ".samples.tsv" : samples_out;
        write_file(path, format_samples(corpus.language(), sampled));
      }
      for (const auto& d : rep.diagnostics) std::cerr << "note: " << d << '\n';
      for (const auto& t : rep.dropped) std::cerr << "dropped: " << t << '\n';
      std::cout << corpus.language().str() << ": " << rep.sets.size() << " tokens embedded, " << rep.dropped.size()
                << " dropped\n";
    } else if (*sim_cmd) {
      std::vector<LanguageRepresentation> reps;
      for (const auto& a : archives) reps.push_back(import_archive(a));
      MatrixOptions options;
      options.kernel = pick_kernel(oracle, strict);
      options.per_token = true;
      options.threads = threads;
      const auto matrix = pairwise_matrix(reps, options);
      write_matrix_dir(matrix, out);
      std::cout << "spread\t" << format_fixed(matrix.spread(), 6) << '\n';
    } else if (*self_cmd) {
      const auto dist = self_similarity(import_archive(archive_path), pick_kernel(oracle, strict));
      const auto text = format_self_similarity(dist);
      if (out.empty()) std::cout << text;
      else write_file(out, text);
    } else if (*report_cmd) {
      report_config.sort = sort == "input" ? SortOrder::Input : SortOrder::AverageSimilarity;
      const auto matrix = read_matrix_dir(matrix_dir);
      const auto order = render_heatmap(matrix, report_config, out);
      if (!self_files.empty()) {
        std::vector<SelfSimilarityDistribution> dists, base;
        for (const auto& f : self_files) dists.push_back(parse_self_similarity(read_file(f)));
        for (const auto& f : compare_files) base.push_back(parse_self_similarity(read_file(f)));
        write_file((fs::path(out) / "selfsim.tsv").string(),
                   format_self_similarity_summary(summarize_self_similarity(dists, base), report_config.decimals));
      }
      for (const auto& id : order) std::cout << id.str() << '\n';
    } else if (*synth_cmd) {
      synth_config.style = parse_synth_style(style);
      write_synthetic_tree(synth_config, out);
      std::cout << synth_config.name << ": " << synth_config.files << " files\n";
    } else if (*run_cmd) {
      for (const auto& spec : inputs) {
        const auto parts = split(spec, ':');
        if (parts.size() < 3) throw Error("--input expects language:lexer:source, got '" + spec + "'");
        std::string source(spec.substr(parts[0].size() + parts[1].size() + 2));
        pipeline.inputs.push_back({LanguageId(std::string(parts[0])), std::string(parts[1]), source});
      }
      pipeline.max_files = parse_max_files(max_files);
      pipeline.embed = embed_flags.options();
      pipeline.out_dir = out;
      run_pipeline(pipeline, &std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "plsim: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
