#ifndef ADVTEXT_ERROR_HPP
#define ADVTEXT_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advtext {

/// Precondition violated by the caller (bad index, duplicate position, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A resource file could not be opened or is structurally unusable.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A line of a resource file failed to parse.
class ParseError : public LoadError {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : LoadError(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Training a victim failed (degenerate corpus).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A victim query failed; carries the transport or protocol cause.
class QueryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace advtext

#endif  // ADVTEXT_ERROR_HPP
