#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace claimrank {

// Base class for every error raised by the library. The CLI maps these to
// exit code 2; anything else is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line_no, const std::string& reason)
      : Error("parse error at line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no),
        reason_(reason) {}

  std::size_t line_no() const { return line_no_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_no_;
  std::string reason_;
};

class VocabError : public Error {
 public:
  VocabError(std::size_t line_no, const std::string& reason)
      : Error("vocab error at line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no) {}

  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

class InvalidTopKError : public Error {
 public:
  using Error::Error;
};

// Raised by candidate scorers; augmentation propagates it untouched.
class ScorerError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class TimeoutError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class MissingLexiconError : public Error {
 public:
  using Error::Error;
};

class TranslatorError : public Error {
 public:
  using Error::Error;
};

class NoPositivesError : public Error {
 public:
  using Error::Error;
};

class NoNegativesError : public Error {
 public:
  using Error::Error;
};

class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// Id-set disagreements between a dataset and a score table or run.
class IdMismatchError : public Error {
 public:
  using Error::Error;
};

class MissingIdError : public IdMismatchError {
 public:
  explicit MissingIdError(const std::string& detail)
      : IdMismatchError("id mismatch: missing " + detail) {}
};

class DuplicateIdError : public IdMismatchError {
 public:
  explicit DuplicateIdError(const std::string& detail)
      : IdMismatchError("id mismatch: duplicate " + detail) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace claimrank
