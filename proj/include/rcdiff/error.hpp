#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rcdiff {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed regex pattern. Carries the offending byte offset.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Input violates a documented precondition (alphabet, shapes, file schema).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A configured size cap (states, transitions, enumeration budget) was exceeded.
class LimitError : public Error {
public:
    using Error::Error;
};

}  // namespace rcdiff
