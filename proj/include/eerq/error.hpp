#pragma once

#include <stdexcept>
#include <string>

namespace eerq {

// Lexical/grammatical failure in any of the text formats. Positions are 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, int line, int col, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ":" + std::to_string(col) +
                             ": " + what),
          file_(std::move(file)), line_(line), col_(col) {}
    const std::string& file() const { return file_; }
    int line() const { return line_; }
    int col() const { return col_; }

private:
    std::string file_;
    int line_ = 0;
    int col_ = 0;
};

// Well-formed input that violates a named invariant (undefined reference,
// bad permutation, arity mismatch, duplicate name, ...).
class SemanticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A configured resource budget (rule cap, atom cap, level cap) was exceeded.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Checked arithmetic on level bounds overflowed.
class OverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace eerq
