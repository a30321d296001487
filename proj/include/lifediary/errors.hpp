#pragma once

#include <stdexcept>
#include <string>

namespace lifediary {

// Error categories used across the library. The CLI maps each category to
// a stable exit code (see tools/lifediary_cli.cpp).

/// A config value violates its contract (bad beam size, negative beta, ...).
struct InvalidConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An otherwise well-formed input violates a precondition (dimension
/// mismatch, label index out of range, ...).
struct InvalidInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A metric was requested on input for which it has no defined value
/// (empty corpus, zero positive labels, ...).
struct UndefinedScoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A referenced file does not exist.
struct MissingFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A data file failed to parse; carries the 1-based line when known.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
  ParseError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_ = 0;
};

}  // namespace lifediary
