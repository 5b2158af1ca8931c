#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexloop {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. line() is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A SentiWordNet record whose scores violate the [0,1] / sum-to-one rules.
class ScoreError : public Error {
 public:
  ScoreError(const std::string& synset_id, std::size_t line, const std::string& what)
      : Error("synset " + synset_id + " (line " + std::to_string(line) + "): " + what),
        synset_id_(synset_id),
        line_(line) {}

  const std::string& synset_id() const { return synset_id_; }
  std::size_t line() const { return line_; }

 private:
  std::string synset_id_;
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// A label submission that does not match the current task, or a repeat.
class ConflictError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lexloop
