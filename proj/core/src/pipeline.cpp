#include "plsim/pipeline.hpp"

#include <filesystem>

#include "plsim/archive.hpp"
#include "plsim/error.hpp"
#include "plsim/text.hpp"

namespace fs = std::filesystem;

namespace plsim {

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log) {
  if (config.inputs.size() < 2) throw Error("pipeline needs at least two languages");
  if (config.out_dir.empty()) throw Error("pipeline needs an output directory");
  config.encoder.validate();
  config.report.validate();
  auto say = [log](const std::string& msg) {
    if (log) *log << msg << '\n';
  };
  const fs::path out(config.out_dir);

  std::vector<LanguageCorpus> corpora;
  std::vector<LexerSpec> specs;
  std::vector<Vocabulary> vocabs;
  for (const auto& input : config.inputs) {
    const fs::path dir = out / input.language.str();
    CorpusManifest manifest = fs::is_regular_file(input.source)
                                  ? parse_manifest(read_file(input.source))
                                  : scan_directory(input.language, input.source, config.max_files);
    manifest.language = input.language;
    if (config.max_files) manifest.max_files = config.max_files;
    write_file((dir / "manifest.tsv").string(), format_manifest(manifest));
    corpora.push_back(split(ingest(manifest), config.train_fraction));
    save_corpus(corpora.back(), (dir / "corpus").string());
    specs.push_back(load_lexer_spec(input.lexer));
    vocabs.push_back(build_vocabulary(corpora.back(), specs.back()));
    write_file((dir / "vocab.tsv").string(), format_vocabulary(vocabs.back()));
    say(input.language.str() + ": " + std::to_string(corpora.back().size()) + " files, " +
        std::to_string(vocabs.back().counts.size()) + " distinct tokens");
  }

  PipelineResult result;
  result.common = intersect(vocabs);
  write_file((out / "common.tsv").string(), format_common_vocabulary(result.common));
  say("common vocabulary: " + std::to_string(result.common.tokens.size()) + " tokens");

  const Kernel kernel = config.strict_fp ? Kernel::Strict : Kernel::Optimized;
  std::vector<LanguageRepresentation> reps;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    const fs::path dir = out / corpora[i].language().str();
    const Encoder encoder = train_encoder(corpora[i], specs[i], config.encoder);
    encoder.save((dir / "encoder.ckpt").string());
    say(corpora[i].language().str() + ": trained, loss " + format_fixed(encoder.log().initial_loss, 4) + " -> " +
        format_fixed(encoder.log().final_loss, 4));
    std::vector<OccurrenceSample> samples;
    reps.push_back(build_representation(encoder, corpora[i], specs[i], result.common, config.samples, config.seed,
                                        config.embed, config.threads, &samples));
    export_archive(reps.back(), (dir / "representation.lrep").string());
    write_file((dir / "samples.tsv").string(), format_samples(corpora[i].language(), samples));
    result.self.push_back(self_similarity(reps.back(), kernel));
    write_file((dir / "selfsim.tsv").string(), format_self_similarity(result.self.back()));
  }

  MatrixOptions options;
  options.kernel = kernel;
  options.per_token = true;
  options.threads = config.threads;
  result.matrix = pairwise_matrix(reps, options);
  write_matrix_dir(result.matrix, (out / "matrix").string());
  render_heatmap(result.matrix, config.report, (out / "report").string());
  write_file((out / "report" / "selfsim.tsv").string(),
             format_self_similarity_summary(summarize_self_similarity(result.self), config.report.decimals));
  say("spread of symmetrized scores: " + format_fixed(result.matrix.spread(), 6));
  return result;
}

}  // namespace plsim
