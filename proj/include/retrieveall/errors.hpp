#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace retrieveall {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroNorm : public Error {
 public:
  using Error::Error;
};

class DuplicateLanguage : public Error {
 public:
  using Error::Error;
};

/// Raised when a language resolves to no adapter. Carries the language that failed.
class AdapterMissing : public Error {
 public:
  AdapterMissing(std::string language, const std::string& message)
      : Error(message), language_(std::move(language)) {}
  const std::string& language() const noexcept { return language_; }

 private:
  std::string language_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data: bad magic, truncated payload, invariant violation on load.
class FormatError : public Error {
 public:
  using Error::Error;
};

class EmptyText : public Error {
 public:
  using Error::Error;
};

class ExternalUnavailable : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class BuildError : public Error {
 public:
  using Error::Error;
};

class EncodeFailure : public Error {
 public:
  EncodeFailure(std::string sample_id, const std::string& message)
      : Error(message), sample_id_(std::move(sample_id)) {}
  const std::string& sample_id() const noexcept { return sample_id_; }

 private:
  std::string sample_id_;
};

class UnknownEntityType : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

/// Output-grammar violation. Carries the byte offset of the first offending character.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string reason)
      : Error("parse error at byte " + std::to_string(offset) + ": " + reason),
        offset_(offset),
        reason_(std::move(reason)) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

class MissingTableEntry : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyIndex : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace retrieveall
