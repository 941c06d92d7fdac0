#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quantiscene {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No collision-free layout was found within the retry budget.
class PlacementFailure : public Error {
 public:
  using Error::Error;
};

/// Area-controlled size ranges would leave the global size bounds.
class InfeasibleAreaControl : public Error {
 public:
  using Error::Error;
};

/// Caption text does not conform to the caption grammar.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A subject was asked to answer a caption outside its competence.
class UnsupportedCaption : public Error {
 public:
  using Error::Error;
};

/// Psychometric data carries no information about the Weber fraction.
class DegenerateData : public Error {
 public:
  using Error::Error;
};

class MissingGroundTruth : public Error {
 public:
  using Error::Error;
};

/// Malformed dataset, manifest, or I/O failure; message names the file.
class DatasetError : public Error {
 public:
  using Error::Error;
};

/// External subject violated the line protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// External subject failed to answer a batch in time.
class SubjectTimeout : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed; the message starts with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace quantiscene
