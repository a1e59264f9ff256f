#include "plsim/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>

#include "plsim/error.hpp"
#include "plsim/text.hpp"

namespace plsim {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "IDENTIFIER";
    case TokenKind::Number: return "NUMBER";
    case TokenKind::String: return "STRING";
    case TokenKind::Operator: return "OPERATOR";
    case TokenKind::Comment: return "COMMENT";
    case TokenKind::Other: return "OTHER";
  }
  return "OTHER";
}

TokenKind parse_token_kind(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto kind : {TokenKind::Identifier, TokenKind::Number, TokenKind::String,
                    TokenKind::Operator, TokenKind::Comment, TokenKind::Other}) {
    if (to_string(kind) == upper) return kind;
  }
  throw LexError("unknown token kind: " + std::string(name));
}

// ---------------------------------------------------------------------------
// CharClass

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Reads one possibly escaped byte at expr[i], advancing i.
unsigned char read_class_char(std::string_view expr, std::size_t& i) {
  if (expr[i] != '\\') return static_cast<unsigned char>(expr[i++]);
  if (i + 1 >= expr.size()) throw LexError("dangling escape in character class");
  const char e = expr[i + 1];
  i += 2;
  switch (e) {
    case 's': return ' ';
    case 't': return '\t';
    case '\\': return '\\';
    case '-': return '-';
    case 'x': {
      if (i + 2 > expr.size()) throw LexError("truncated \\x escape in character class");
      const int hi = hex_value(expr[i]), lo = hex_value(expr[i + 1]);
      if (hi < 0 || lo < 0) throw LexError("bad \\x escape in character class");
      i += 2;
      return static_cast<unsigned char>(hi * 16 + lo);
    }
    default: return static_cast<unsigned char>(e);
  }
}

std::string class_char_repr(unsigned c) {
  if (c > 0x20 && c < 0x7f && c != '-' && c != '\\') return std::string(1, static_cast<char>(c));
  static constexpr char kHex[] = "0123456789abcdef";
  return std::string{'\\', 'x', kHex[c >> 4], kHex[c & 15]};
}

}  // namespace

CharClass CharClass::parse(std::string_view expr) {
  CharClass cls;
  std::size_t i = 0;
  while (i < expr.size()) {
    const unsigned char first = read_class_char(expr, i);
    if (i + 1 < expr.size() && expr[i] == '-') {
      ++i;
      const unsigned char last = read_class_char(expr, i);
      if (last < first) throw LexError("reversed range in character class: " + std::string(expr));
      for (unsigned c = first; c <= last; ++c) cls.bits_.set(c);
    } else {
      cls.bits_.set(first);
    }
  }
  return cls;
}

std::string CharClass::to_string() const {
  std::string out;
  unsigned c = 0;
  while (c < 256) {
    if (!bits_.test(c)) {
      ++c;
      continue;
    }
    unsigned last = c;
    while (last + 1 < 256 && bits_.test(last + 1)) ++last;
    out += class_char_repr(c);
    if (last > c + 1) {
      out += '-';
      out += class_char_repr(last);
    } else if (last == c + 1) {
      out += class_char_repr(last);
    }
    c = last + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// LexerSpec

void LexerSpec::validate() const {
  if (language.empty()) throw LexError("lexer spec has no language");
  auto check_prefix_free = [&](const std::vector<std::string>& openers) {
    for (std::size_t a = 0; a < openers.size(); ++a) {
      if (openers[a].empty()) throw LexError(language + ": empty comment delimiter");
      for (std::size_t b = 0; b < openers.size(); ++b) {
        if (a != b && openers[b].starts_with(openers[a])) {
          throw LexError(language + ": comment opener '" + openers[a] + "' is a prefix of '" +
                         openers[b] + "'");
        }
      }
    }
  };
  check_prefix_free(line_comments);
  std::vector<std::string> block_openers;
  for (const auto& b : block_comments) {
    if (b.close.empty()) throw LexError(language + ": empty block comment delimiter");
    block_openers.push_back(b.open);
  }
  check_prefix_free(block_openers);
  for (const auto& s : strings) {
    if (s.open.empty() || s.close.empty()) throw LexError(language + ": empty string delimiter");
  }
  for (const auto& op : operators) {
    if (op.empty()) throw LexError(language + ": empty operator");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> fields_of(std::string_view value) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < value.size()) {
    while (i < value.size() && std::isspace(static_cast<unsigned char>(value[i]))) ++i;
    if (i == value.size()) break;
    std::size_t j = i;
    while (j < value.size() && !std::isspace(static_cast<unsigned char>(value[j]))) ++j;
    out.push_back(unescape_field(value.substr(i, j - i)));
    i = j;
  }
  return out;
}

std::string field_repr(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case ' ': out += "\\s"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

bool parse_bool(std::string_view v, std::string_view key) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw LexError("bad boolean for " + std::string(key) + ": " + std::string(v));
}

}  // namespace

LexerSpec parse_lexer_spec(std::string_view text) {
  LexerSpec spec;
  int lineno = 0;
  for (auto raw : split(text, '\n')) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw LexError("lexer spec line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto fields = fields_of(value);
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (fields.size() < lo || fields.size() > hi) {
        throw LexError("lexer spec line " + std::to_string(lineno) + ": wrong field count for " + key);
      }
    };
    if (key == "language") {
      need(1, 1);
      spec.language = fields[0];
    } else if (key == "case_sensitive") {
      need(1, 1);
      spec.case_sensitive = parse_bool(fields[0], key);
    } else if (key == "line_comment") {
      need(1, 64);
      spec.line_comments.insert(spec.line_comments.end(), fields.begin(), fields.end());
    } else if (key == "block_comment") {
      need(2, 3);
      BlockComment b{fields[0], fields[1], false};
      if (fields.size() == 3) {
        if (fields[2] != "nested") throw LexError("block_comment third field must be 'nested'");
        b.nested = true;
      }
      spec.block_comments.push_back(std::move(b));
    } else if (key == "string") {
      need(2, 3);
      StringDelimiter s{fields[0], fields[1], std::nullopt};
      if (fields.size() == 3) {
        if (fields[2].size() != 1) throw LexError("string escape must be a single character");
        s.escape = fields[2][0];
      }
      spec.strings.push_back(std::move(s));
    } else if (key == "identifier_start") {
      spec.identifier_start = CharClass::parse(value);
    } else if (key == "identifier_continue") {
      spec.identifier_continue = CharClass::parse(value);
    } else if (key == "operators") {
      spec.operators.insert(spec.operators.end(), fields.begin(), fields.end());
    } else {
      throw LexError("lexer spec line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  spec.validate();
  return spec;
}

std::string to_text(const LexerSpec& spec) {
  std::string out;
  out += "language = " + spec.language + "\n";
  out += std::string("case_sensitive = ") + (spec.case_sensitive ? "true" : "false") + "\n";
  for (const auto& p : spec.line_comments) out += "line_comment = " + field_repr(p) + "\n";
  for (const auto& b : spec.block_comments) {
    out += "block_comment = " + field_repr(b.open) + " " + field_repr(b.close);
    if (b.nested) out += " nested";
    out += "\n";
  }
  for (const auto& s : spec.strings) {
    out += "string = " + field_repr(s.open) + " " + field_repr(s.close);
    if (s.escape) out += " " + field_repr(std::string(1, *s.escape));
    out += "\n";
  }
  out += "identifier_start = " + spec.identifier_start.to_string() + "\n";
  out += "identifier_continue = " + spec.identifier_continue.to_string() + "\n";
  for (std::size_t i = 0; i < spec.operators.size(); i += 16) {
    out += "operators =";
    for (std::size_t j = i; j < std::min(i + 16, spec.operators.size()); ++j) {
      out += " " + field_repr(spec.operators[j]);
    }
    out += "\n";
  }
  return out;
}

LexerSpec load_lexer_spec(const std::string& name_or_path) {
  if (std::filesystem::is_regular_file(name_or_path)) {
    return parse_lexer_spec(read_file(name_or_path));
  }
  return builtin_lexer_spec(name_or_path);
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_alnum(char c) {
  return is_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::size_t utf8_length(std::string_view s, std::size_t i) {
  const auto b = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if (b >= 0xF0 && b <= 0xF4) len = 4;
  else if (b >= 0xE0) len = 3;
  else if (b >= 0xC2 && b <= 0xDF) len = 2;
  if (i + len > s.size()) return 1;
  for (std::size_t k = 1; k < len; ++k) {
    const auto c = static_cast<unsigned char>(s[i + k]);
    if (c < 0x80 || c > 0xBF) return 1;
  }
  return len;
}

class Scanner {
 public:
  Scanner(std::string_view src, const LexerSpec& spec) : src_(src), spec_(spec) {
    for (const auto& op : spec.operators) {
      ops_by_first_[static_cast<unsigned char>(op[0])].push_back(&op);
    }
    for (auto& bucket : ops_by_first_) {
      std::stable_sort(bucket.begin(), bucket.end(),
                       [](const std::string* a, const std::string* b) { return a->size() > b->size(); });
    }
  }

  LexResult run() {
    LexResult result;
    while (true) {
      skip_whitespace();
      if (pos_ >= src_.size()) break;
      if (src_[pos_] == '\0') {
        throw LexError("NUL byte at offset " + std::to_string(pos_) + " (binary content)");
      }
      const std::size_t begin = pos_;
      const int line = line_;
      const TokenKind kind = scan_one(result.diagnostics);
      Token tok;
      tok.begin = begin;
      tok.end = pos_;
      tok.kind = kind;
      tok.line = line;
      tok.lexeme.assign(src_.substr(begin, pos_ - begin));
      result.tokens.push_back(std::move(tok));
    }
    return result;
  }

 private:
  bool at(std::string_view s) const { return src_.substr(pos_).starts_with(s); }

  void advance(std::size_t n) {
    const std::size_t stop = std::min(src_.size(), pos_ + n);
    for (; pos_ < stop; ++pos_) {
      if (src_[pos_] == '\n') ++line_;
    }
  }

  void skip_whitespace() {
    while (pos_ < src_.size() && is_space(src_[pos_])) advance(1);
  }

  void diag(std::vector<LexDiagnostic>& out, std::size_t offset, int line, std::string msg) {
    out.push_back({offset, line, std::move(msg)});
  }

  TokenKind scan_one(std::vector<LexDiagnostic>& diags) {
    if (const StringDelimiter* s = longest_string_opener()) {
      scan_string(*s, diags);
      return TokenKind::String;
    }
    if (scan_comment(diags)) return TokenKind::Comment;
    const char c = src_[pos_];
    if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
      scan_number();
      return TokenKind::Number;
    }
    if (spec_.identifier_start.contains(c)) {
      advance(1);
      while (pos_ < src_.size() && spec_.identifier_continue.contains(src_[pos_])) advance(1);
      return TokenKind::Identifier;
    }
    for (const std::string* op : ops_by_first_[static_cast<unsigned char>(c)]) {
      if (at(*op)) {
        advance(op->size());
        return TokenKind::Operator;
      }
    }
    advance(utf8_length(src_, pos_));
    return TokenKind::Other;
  }

  const StringDelimiter* longest_string_opener() const {
    const StringDelimiter* best = nullptr;
    for (const auto& s : spec_.strings) {
      if (at(s.open) && (!best || s.open.size() > best->open.size())) best = &s;
    }
    return best;
  }

  void scan_string(const StringDelimiter& s, std::vector<LexDiagnostic>& diags) {
    const std::size_t start = pos_;
    const int line = line_;
    advance(s.open.size());
    while (pos_ < src_.size()) {
      if (s.escape && src_[pos_] == *s.escape) {
        advance(2);
        continue;
      }
      if (at(s.close)) {
        advance(s.close.size());
        return;
      }
      advance(1);
    }
    diag(diags, start, line, "unterminated string literal");
  }

  bool scan_comment(std::vector<LexDiagnostic>& diags) {
    const std::string* line_prefix = nullptr;
    for (const auto& p : spec_.line_comments) {
      if (at(p) && (!line_prefix || p.size() > line_prefix->size())) line_prefix = &p;
    }
    const BlockComment* block = nullptr;
    for (const auto& b : spec_.block_comments) {
      if (at(b.open) && (!block || b.open.size() > block->open.size())) block = &b;
    }
    if (!line_prefix && !block) return false;
    if (line_prefix && (!block || line_prefix->size() >= block->open.size())) {
      std::size_t stop = src_.find('\n', pos_);
      if (stop == std::string_view::npos) stop = src_.size();
      if (stop > pos_ && src_[stop - 1] == '\r') --stop;
      advance(std::max(stop, pos_ + line_prefix->size()) - pos_);
      return true;
    }
    const std::size_t start = pos_;
    const int line = line_;
    advance(block->open.size());
    int depth = 1;
    while (pos_ < src_.size()) {
      if (at(block->close)) {
        advance(block->close.size());
        if (--depth == 0) return true;
        continue;
      }
      if (block->nested && at(block->open)) {
        advance(block->open.size());
        ++depth;
        continue;
      }
      advance(1);
    }
    diag(diags, start, line, "unterminated block comment");
    return true;
  }

  void scan_number() {
    const std::size_t start = pos_;
    const bool hex = at("0x") || at("0X");
    bool seen_dot = src_[pos_] == '.';
    advance(1);
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (is_alnum(c) || c == '_') {
        advance(1);
      } else if (c == '.' && !seen_dot && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1])) {
        seen_dot = true;
        advance(1);
      } else if ((c == '+' || c == '-') && !hex && pos_ > start &&
                 (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E') &&
                 pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1])) {
        advance(1);
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  const LexerSpec& spec_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::array<std::vector<const std::string*>, 256> ops_by_first_;
};

}  // namespace

LexResult tokenize(std::string_view source, const LexerSpec& spec) {
  return Scanner(source, spec).run();
}

std::vector<Token> strip_comments(const std::vector<Token>& tokens) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  std::copy_if(tokens.begin(), tokens.end(), std::back_inserter(out),
               [](const Token& t) { return t.kind != TokenKind::Comment; });
  return out;
}

std::string vocabulary_key(const Token& token, const LexerSpec& spec) {
  if (spec.case_sensitive || token.kind == TokenKind::String) return token.lexeme;
  std::string key = token.lexeme;
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return key;
}

}  // namespace plsim
