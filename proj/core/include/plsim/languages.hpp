#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace plsim {

/// One row of the reference language selection: the twenty languages, the
/// reason each was included, and the size of its full-scale corpus.
struct LanguageProfile {
  std::string_view id;            // lowercase id, also the builtin lexer spec name
  std::string_view display_name;
  std::string_view inclusion;
  std::uint64_t files;
  std::uint64_t total_tokens;
};

std::span<const LanguageProfile> reference_languages();

/// Full-scale per-language file cap.
inline constexpr std::uint64_t kReferenceMaxFiles = 100'000;
inline constexpr double kReferenceTrainFraction = 0.9;

}  // namespace plsim
