#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gist {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Reference to a node, edge or query that does not exist.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace gist
