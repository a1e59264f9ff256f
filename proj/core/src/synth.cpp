#include "plsim/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

#include "plsim/error.hpp"
#include "plsim/text.hpp"

namespace fs = std::filesystem;

namespace plsim {

SynthStyle parse_synth_style(std::string_view name) {
  if (name == "curly") return SynthStyle::Curly;
  if (name == "list") return SynthStyle::List;
  throw Error("unknown synthetic style '" + std::string(name) + "' (expected curly or list)");
}

const std::vector<std::string>& synth_common_inventory() {
  static const std::vector<std::string> kInventory = {
      "x",   "y",    "i",     "j",     "k",      "n",     "sum",   "count", "value", "result",
      "data", "item", "total", "index", "size",   "0",     "1",     "2",     "3",     "10",
      "100", "(",    ")",     "+",     "-",      "*",     "<",     ">",     "="};
  return kInventory;
}

namespace {

const std::vector<std::string> kCommonNames = {"x",    "y",    "i",     "j",     "k",    "n",   "sum",  "count",
                                               "value", "result", "data", "item", "total", "index", "size"};
const std::vector<std::string> kNumbers = {"0", "1", "2", "3", "10", "100"};
const std::vector<std::string> kArith = {"+", "-", "*"};

using Rng = std::mt19937_64;

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& xs) {
  return xs[uniform_below(rng, xs.size())];
}

std::size_t weighted(Rng& rng, const std::vector<double>& w) {
  double total = 0.0;
  for (double x : w) total += x;
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

bool chance(Rng& rng, double p) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p; }

std::string syllable(Rng& rng) {
  static const std::string kCons = "bdfglmnprstvz";
  static const std::string kVow = "aeiou";
  std::string s;
  s += kCons[uniform_below(rng, kCons.size())];
  s += kVow[uniform_below(rng, kVow.size())];
  if (chance(rng, 0.4)) s += kCons[uniform_below(rng, kCons.size())];
  return s;
}

struct Grammar {
  SynthStyle style{};
  std::string kw_decl, kw_set, kw_func, kw_ret, kw_if, kw_loop, kw_print;
  std::vector<std::string> functions;  // private callable names
  std::vector<std::string> locals;     // private variable names
  std::vector<std::string> counters, accumulators, params, general;
  std::vector<std::string> comment_words;
  std::vector<double> weights;  // decl, assign, if, loop, call, comment
  double nesting = 0.3;
};

Grammar make_grammar(SynthStyle style, std::uint64_t seed) {
  Rng rng(derive_seed(seed, style == SynthStyle::Curly ? "grammar-curly" : "grammar-list"));
  Grammar g;
  g.style = style;
  if (style == SynthStyle::Curly) {
    g.kw_decl = pick(rng, std::vector<std::string>{"let", "var", "val"});
    g.kw_set = "";
    g.kw_func = pick(rng, std::vector<std::string>{"fn", "func", "proc"});
    g.kw_ret = pick(rng, std::vector<std::string>{"return", "ret", "yield"});
    g.kw_if = pick(rng, std::vector<std::string>{"if", "when", "check"});
    g.kw_loop = pick(rng, std::vector<std::string>{"while", "loop", "until"});
    g.kw_print = pick(rng, std::vector<std::string>{"print", "puts", "echo"});
  } else {
    g.kw_decl = pick(rng, std::vector<std::string>{"define", "defvar", "defparam"});
    g.kw_set = pick(rng, std::vector<std::string>{"setq", "setf", "assign"});
    g.kw_func = pick(rng, std::vector<std::string>{"defun", "defn", "defproc"});
    g.kw_ret = "";
    g.kw_if = pick(rng, std::vector<std::string>{"cond", "unless", "whenever"});
    g.kw_loop = pick(rng, std::vector<std::string>{"dotimes", "repeat", "iterate"});
    g.kw_print = pick(rng, std::vector<std::string>{"display", "princ", "show"});
  }
  // Curly names carry an uppercase letter and list names an underscore, so
  // the private vocabularies of the two styles cannot meet.
  std::set<std::string> used;
  auto fresh = [&](bool capital) {
    while (true) {
      std::string a = syllable(rng), b = syllable(rng);
      std::string name;
      if (style == SynthStyle::Curly) {
        if (capital) a[0] = static_cast<char>(a[0] - 'a' + 'A');
        b[0] = static_cast<char>(b[0] - 'a' + 'A');
        name = a + b;
      } else {
        name = a + "_" + b;
      }
      if (used.insert(name).second) return name;
    }
  };
  for (int i = 0; i < 10; ++i) g.functions.push_back(fresh(false));
  for (int i = 0; i < 10; ++i) g.locals.push_back(fresh(false));
  for (int i = 0; i < 24; ++i) g.comment_words.push_back(syllable(rng) + syllable(rng));

  auto names = kCommonNames;
  std::shuffle(names.begin(), names.end(), rng);
  g.counters.assign(names.begin(), names.begin() + 3);
  g.accumulators.assign(names.begin() + 3, names.begin() + 6);
  g.params.assign(names.begin() + 6, names.begin() + 10);
  g.general.assign(names.begin() + 10, names.end());

  for (int i = 0; i < 6; ++i) g.weights.push_back(0.5 + static_cast<double>(uniform_below(rng, 100)) / 40.0);
  g.nesting = 0.15 + static_cast<double>(uniform_below(rng, 30)) / 100.0;
  return g;
}

class Writer {
 public:
  Writer(const Grammar& g, Rng& rng) : g_(g), rng_(rng) {}

  std::string file(std::size_t statements) {
    out_.clear();
    std::size_t emitted = 0;
    while (emitted < statements) {
      if (chance(rng_, 0.35)) {
        const std::size_t body = 2 + uniform_below(rng_, 4);
        function(body);
        emitted += body + 1;
      } else {
        statement(0);
        ++emitted;
      }
    }
    return out_;
  }

 private:
  const std::string& var() {
    const double u = static_cast<double>(uniform_below(rng_, 100)) / 100.0;
    if (u < 0.25) return pick(rng_, g_.locals);
    if (u < 0.5) return pick(rng_, g_.general);
    if (u < 0.75) return pick(rng_, g_.accumulators);
    return pick(rng_, g_.params);
  }

  std::string atom() {
    const auto r = uniform_below(rng_, 10);
    if (r < 3) return pick(rng_, kNumbers);
    return var();
  }

  void line(int depth, const std::string& text) {
    out_.append(static_cast<std::size_t>(depth) * 2, ' ');
    out_ += text;
    out_ += '\n';
  }

  std::string expr(int depth) {
    const bool curly = g_.style == SynthStyle::Curly;
    const auto r = uniform_below(rng_, 10);
    if (r < 4 || depth > 1) return atom();
    if (r < 8) {
      const std::string op = pick(rng_, kArith);
      return curly ? atom() + " " + op + " " + expr(depth + 1)
                   : "( " + op + " " + expr(depth + 1) + " " + atom() + " )";
    }
    const std::string& f = pick(rng_, g_.functions);
    return curly ? f + " ( " + atom() + " , " + atom() + " )" : "( " + f + " " + atom() + " " + atom() + " )";
  }

  std::string cond() {
    const bool curly = g_.style == SynthStyle::Curly;
    const auto r = uniform_below(rng_, 3);
    const std::string a = var(), b = atom();
    if (curly) return a + (r == 0 ? " < " : r == 1 ? " > " : " == ") + b;
    return std::string("( ") + (r == 0 ? "<" : r == 1 ? ">" : "=") + " " + a + " " + b + " )";
  }

  void block(int depth) {
    const std::size_t n = 1 + uniform_below(rng_, 3);
    for (std::size_t i = 0; i < n; ++i) statement(depth);
  }

  void statement(int depth) {
    const bool curly = g_.style == SynthStyle::Curly;
    std::size_t kind = weighted(rng_, g_.weights);
    if ((kind == 2 || kind == 3) && (depth >= 2 || !chance(rng_, 0.5 + g_.nesting))) kind = 0;
    switch (kind) {
      case 0: {
        const std::string v = var();
        line(depth, curly ? g_.kw_decl + " " + v + " = " + expr(0) + " ;"
                          : "( " + g_.kw_decl + " " + v + " " + expr(0) + " )");
        break;
      }
      case 1: {
        const std::string& acc = pick(rng_, g_.accumulators);
        const std::string op = pick(rng_, kArith);
        line(depth, curly ? acc + " = " + acc + " " + op + " " + expr(1) + " ;"
                          : "( " + g_.kw_set + " " + acc + " ( " + op + " " + acc + " " + expr(1) + " ) )");
        break;
      }
      case 2: {
        if (curly) {
          line(depth, g_.kw_if + " ( " + cond() + " ) {");
          block(depth + 1);
          line(depth, "}");
        } else {
          line(depth, "( " + g_.kw_if + " " + cond());
          block(depth + 1);
          line(depth, ")");
        }
        break;
      }
      case 3: {
        const std::string& c = pick(rng_, g_.counters);
        if (curly) {
          line(depth, g_.kw_loop + " ( " + c + " < " + atom() + " ) {");
          block(depth + 1);
          line(depth + 1, c + " = " + c + " + 1 ;");
          line(depth, "}");
        } else {
          line(depth, "( " + g_.kw_loop + " ( " + c + " " + atom() + " )");
          block(depth + 1);
          line(depth, ")");
        }
        break;
      }
      case 4: {
        if (chance(rng_, 0.5)) {
          line(depth, curly ? g_.kw_print + " ( " + expr(0) + " ) ;" : "( " + g_.kw_print + " " + expr(0) + " )");
        } else {
          const std::string& f = pick(rng_, g_.functions);
          line(depth, curly ? f + " ( " + expr(1) + " , " + atom() + " ) ;"
                            : "( " + f + " " + expr(1) + " " + atom() + " )");
        }
        break;
      }
      default: {
        std::string text = "//";
        const std::size_t words = 2 + uniform_below(rng_, 5);
        for (std::size_t i = 0; i < words; ++i) text += " " + pick(rng_, g_.comment_words);
        line(depth, text);
      }
    }
  }

  void function(std::size_t body) {
    const bool curly = g_.style == SynthStyle::Curly;
    const std::string& f = pick(rng_, g_.functions);
    const std::string& a = pick(rng_, g_.params);
    const std::string& b = pick(rng_, g_.params);
    line(0, curly ? g_.kw_func + " " + f + " ( " + a + " , " + b + " ) {"
                  : "( " + g_.kw_func + " " + f + " ( " + a + " " + b + " )");
    for (std::size_t i = 0; i < body; ++i) statement(1);
    if (curly) {
      line(1, g_.kw_ret + " " + expr(0) + " ;");
      line(0, "}");
    } else {
      line(1, expr(0));
      line(0, ")");
    }
  }

  const Grammar& g_;
  Rng& rng_;
  std::string out_;
};

}  // namespace

std::vector<std::string> generate_synthetic_sources(const SynthLanguageConfig& config) {
  if (config.files == 0) throw Error("synthetic language needs at least one file");
  if (config.min_statements == 0 || config.max_statements < config.min_statements) {
    throw Error("synthetic statement range is empty");
  }
  const Grammar g = make_grammar(config.style, config.grammar_seed);
  Rng rng(derive_seed(config.corpus_seed, "corpus:" + config.name));
  Writer writer(g, rng);
  std::vector<std::string> files;
  files.reserve(config.files);
  const std::size_t span = config.max_statements - config.min_statements + 1;
  for (std::size_t i = 0; i < config.files; ++i) {
    files.push_back(writer.file(config.min_statements + uniform_below(rng, span)));
  }
  return files;
}

namespace {

std::string file_name(std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "%04zu.src", i);
  return name;
}

}  // namespace

LanguageCorpus synthetic_corpus(const SynthLanguageConfig& config, double train_fraction) {
  auto sources = generate_synthetic_sources(config);
  std::vector<SourceFile> files;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    files.push_back({"synth/" + config.name + "/" + file_name(i), std::move(sources[i]), Partition::Train});
  }
  return split(LanguageCorpus(LanguageId(config.name), std::move(files)), train_fraction);
}

void write_synthetic_tree(const SynthLanguageConfig& config, const std::string& dir) {
  const auto sources = generate_synthetic_sources(config);
  for (std::size_t i = 0; i < sources.size(); ++i) write_file((fs::path(dir) / file_name(i)).string(), sources[i]);
}

}  // namespace plsim
