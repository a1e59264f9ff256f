#pragma once

#include <bitset>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plsim {

enum class TokenKind { Identifier, Number, String, Operator, Comment, Other };

std::string_view to_string(TokenKind kind);
/// Parses "IDENTIFIER", "NUMBER", ...; throws LexError on unknown names.
TokenKind parse_token_kind(std::string_view name);

struct Token {
  std::string lexeme;
  TokenKind kind = TokenKind::Other;
  std::size_t begin = 0;  // byte offset, inclusive
  std::size_t end = 0;    // byte offset, exclusive
  int line = 1;

  friend bool operator==(const Token&, const Token&) = default;
};

/// 256-entry byte class parsed from a range expression such as "a-zA-Z_\x80-\xff".
class CharClass {
 public:
  CharClass() = default;
  static CharClass parse(std::string_view expr);

  bool contains(char c) const { return bits_.test(static_cast<unsigned char>(c)); }
  /// Canonical range expression; parse(to_string()) reproduces the class.
  std::string to_string() const;

  friend bool operator==(const CharClass&, const CharClass&) = default;

 private:
  std::bitset<256> bits_;
};

struct BlockComment {
  std::string open;
  std::string close;
  bool nested = false;

  friend bool operator==(const BlockComment&, const BlockComment&) = default;
};

struct StringDelimiter {
  std::string open;
  std::string close;
  std::optional<char> escape;

  friend bool operator==(const StringDelimiter&, const StringDelimiter&) = default;
};

/// Declarative, comment-aware tokenization rules for one language.
struct LexerSpec {
  std::string language;
  std::vector<std::string> line_comments;
  std::vector<BlockComment> block_comments;
  std::vector<StringDelimiter> strings;
  CharClass identifier_start;
  CharClass identifier_continue;
  std::vector<std::string> operators;
  bool case_sensitive = true;

  /// Throws LexError when a comment opener is a prefix of another or a
  /// delimiter is empty.
  void validate() const;

  friend bool operator==(const LexerSpec&, const LexerSpec&) = default;
};

/// Reads the line-oriented `key = value` spec format. Values are
/// whitespace-separated fields; `\s`, `\t`, `\\` escape literal characters.
LexerSpec parse_lexer_spec(std::string_view text);
std::string to_text(const LexerSpec& spec);

/// Curated specs shipped with the library, by lowercase language name.
const LexerSpec& builtin_lexer_spec(std::string_view language);
std::vector<std::string> builtin_lexer_languages();

/// Accepts either a builtin language name or a path to a spec file.
LexerSpec load_lexer_spec(const std::string& name_or_path);

struct LexDiagnostic {
  std::size_t offset = 0;
  int line = 1;
  std::string message;
};

struct LexResult {
  std::vector<Token> tokens;
  std::vector<LexDiagnostic> diagnostics;
};

/// Splits source into tokens; whitespace is skipped. Unterminated strings
/// and block comments run to end of input and produce a diagnostic.
/// Throws LexError when the source holds a NUL byte (binary content).
LexResult tokenize(std::string_view source, const LexerSpec& spec);

std::vector<Token> strip_comments(const std::vector<Token>& tokens);

/// String used for vocabulary identity: the lexeme, lower-cased for
/// case-insensitive specs unless the token is a string literal.
std::string vocabulary_key(const Token& token, const LexerSpec& spec);

}  // namespace plsim
