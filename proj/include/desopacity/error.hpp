#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace desopacity {

// Base for every error the library raises. The C API maps each subclass to a
// distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a model invariant.
class SemanticError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::size_t decision_states, std::size_t observation_states)
      : Error(what), decision_states_(decision_states), observation_states_(observation_states) {}
  std::size_t decision_states() const { return decision_states_; }
  std::size_t observation_states() const { return observation_states_; }

 private:
  std::size_t decision_states_;
  std::size_t observation_states_;
};

}  // namespace desopacity
