#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdsym {

// Root of every library failure. The CLI maps the three branches below onto
// distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied input that violates a documented precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& message, std::size_t position)
        : ValidationError(message + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Evaluation left a function's mathematical domain (ln of a non-positive
// number, fractional power of a negative base, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A numerical procedure could not complete: blow-up, degenerate diffusivity,
// non-convergent root search.
class RuntimeFailure : public Error {
public:
    using Error::Error;
};

}  // namespace rdsym
