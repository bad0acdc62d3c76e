#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hmmsb {

/// Bad arguments or configuration supplied by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input data. `line()` is 1-based, or 0 when not tied to a line.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what), line_(0) {}
  /// Formats as "source:line: what".
  InputError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " +
                           what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A broken internal invariant (corrupted counts, empty support where the
/// model guarantees mass). Never recovered from silently.
class InternalFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hmmsb
