#pragma once

#include <stdexcept>
#include <string>

namespace plsim {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorpusError : public Error {
 public:
  using Error::Error;
};

class LexError : public Error {
 public:
  using Error::Error;
};

class VocabError : public Error {
 public:
  using Error::Error;
};

class EncoderError : public Error {
 public:
  using Error::Error;
};

class SimilarityError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (manifest, vocabulary, matrix, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace plsim
