#pragma once

#include <stdexcept>
#include <string>

namespace qlm {

/// Base of every error thrown by the library. The CLI maps the subclasses
/// onto its exit codes: IoError -> 1, DomainError -> 2, NumericError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failures (missing, unreadable or unwritable paths).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Inputs that violate a documented precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

class OutOfVocabulary : public DomainError {
 public:
  explicit OutOfVocabulary(const std::string& word)
      : DomainError("word not in vocabulary: '" + word + "'"), word_(word) {}
  const std::string& word() const noexcept { return word_; }

 private:
  std::string word_;
};

class InvalidUtf8 : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Model-file decoding failures. Each failure mode is its own type so callers
/// can tell a foreign file from a damaged one.
class FormatError : public DomainError {
 public:
  using DomainError::DomainError;
};

class BadMagic : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedPayload : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedFlags : public FormatError {
 public:
  using FormatError::FormatError;
};

/// NaN/inf during training or a decomposition that did not converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace qlm
