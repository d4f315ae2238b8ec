#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ridgekit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed binary input (PGM). Carries the byte offset where decoding failed.
class InputFormatError : public Error {
 public:
  InputFormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), reason_(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
  std::size_t offset_;
};

/// Malformed text archive. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), reason_(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
  std::size_t line_;
};

/// Archive files that parse but disagree with each other (unknown ids and so on).
class ReferenceError : public Error {
 public:
  using Error::Error;
};

/// An image could not be carried through the processing pipeline.
class PipelineError : public Error {
 public:
  using Error::Error;
};

class SegmentationError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

class CoreDetectionError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

class ExtractionError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

/// Caller passed arguments that violate an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace ridgekit
