#include "plsim/representation.hpp"

#include "plsim/error.hpp"

namespace plsim {

void TokenEmbeddingSet::add(std::int64_t occurrence, std::span<const float> vec) {
  if (dim == 0 && empty()) dim = vec.size();
  if (vec.size() != dim || dim == 0) {
    throw EncoderError("token '" + token + "': vector width " + std::to_string(vec.size()) +
                       " does not match " + std::to_string(dim));
  }
  values.insert(values.end(), vec.begin(), vec.end());
  occurrences.push_back(occurrence);
}

TokenEmbeddingSet TokenEmbeddingSet::from_rows(std::string token, const std::vector<std::vector<float>>& rows) {
  TokenEmbeddingSet set;
  set.token = std::move(token);
  for (std::size_t i = 0; i < rows.size(); ++i) set.add(static_cast<std::int64_t>(i), rows[i]);
  return set;
}

void LanguageRepresentation::validate() const {
  if (dim == 0) throw EncoderError("representation for " + language.str() + " has zero width");
  for (const auto& [key, set] : sets) {
    if (key != set.token) throw EncoderError("representation key '" + key + "' does not match its set");
    if (set.empty()) throw EncoderError("representation token '" + key + "' has no vectors");
    if (set.dim != dim) throw EncoderError("representation token '" + key + "' has mismatched width");
    if (set.values.size() != set.size() * dim) throw EncoderError("representation token '" + key + "' is malformed");
  }
}

}  // namespace plsim
