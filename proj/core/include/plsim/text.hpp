#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace plsim {

/// Decodes bytes as UTF-8, replacing every invalid sequence with U+FFFD.
/// `replaced` receives the number of substitutions made.
std::string decode_utf8_lossy(std::string_view bytes, std::size_t* replaced = nullptr);

/// Escapes backslash, tab, newline and carriage return so a value fits in
/// one TSV field.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

/// Lines of a LF-terminated text; a trailing empty line is dropped.
std::vector<std::string_view> split_lines(std::string_view text);

/// Value of `key=value` in a `#plsim-... v1 a=b c=d` header line. Throws
/// FormatError when the key is absent.
std::string header_attribute(std::string_view header, std::string_view key);

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic sub-seed for a string-keyed work item.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

/// Unbiased integer in [0, bound) from a 64-bit engine.
template <typename Engine>
std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = engine();
  } while (x >= limit);
  return x % bound;
}

/// Reads a whole file as raw bytes; throws plsim::Error when unreadable.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Formats a real with a fixed number of decimals, locale independent.
std::string format_fixed(double value, int decimals);

}  // namespace plsim
