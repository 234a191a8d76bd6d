#pragma once

#include <stdexcept>
#include <string>

namespace isochrono {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied a value outside an operation's domain.
class InvalidInput : public Error {
  public:
    using Error::Error;
};

/// A structured input is missing a required column or field.
class SchemaError : public InvalidInput {
  public:
    explicit SchemaError(std::string field)
        : InvalidInput("missing required field: " + field), field_(std::move(field)) {}
    const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

class EncodingError : public InvalidInput {
  public:
    EncodingError(const std::string &what, std::size_t byte_offset)
        : InvalidInput(what + " at byte offset " + std::to_string(byte_offset)),
          byte_offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return byte_offset_; }

  private:
    std::size_t byte_offset_;
};

class DuplicateIdError : public InvalidInput {
  public:
    explicit DuplicateIdError(const std::string &id)
        : InvalidInput("duplicate segment id: " + id) {}
};

class AlignmentError : public InvalidInput {
  public:
    AlignmentError(std::size_t expected, std::size_t got)
        : InvalidInput("submission line count mismatch: expected " + std::to_string(expected) +
                       ", got " + std::to_string(got)),
          expected_(expected), got_(got) {}
    std::size_t expected() const noexcept { return expected_; }
    std::size_t got() const noexcept { return got_; }

  private:
    std::size_t expected_;
    std::size_t got_;
};

class UnknownIdError : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class EmptyAggregateError : public InvalidInput {
  public:
    EmptyAggregateError() : InvalidInput("cannot aggregate an empty list of segment metrics") {}
};

class InsufficientDataError : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

/// The scorer bridge could not be reached or dropped the connection.
class TransportError : public Error {
  public:
    using Error::Error;
};

/// The scorer bridge answered with something that violates the wire protocol.
class ProtocolError : public Error {
  public:
    using Error::Error;
};

/// A remote or local predictor refused a single item.
class PredictionError : public Error {
  public:
    PredictionError(std::string code, const std::string &message)
        : Error(code + ": " + message), code_(std::move(code)) {}
    const std::string &code() const noexcept { return code_; }

  private:
    std::string code_;
};

/// Too many segments failed for a system's results to be meaningful.
class EvaluationError : public Error {
  public:
    using Error::Error;
};

} // namespace isochrono
