#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wcoda {

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_{line} {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input whose axes are inconsistent (gaps, ragged ages, shape mismatch).
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Value outside the domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// File-system failures surfaced by the CLI layer.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wcoda
