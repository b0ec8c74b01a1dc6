#pragma once

#include <stdexcept>
#include <string>

namespace nkpower {

// Configuration or parameter problems the caller can fix (CLI exit code 2).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidParameter : public UsageError {
public:
    using UsageError::UsageError;
};

class InvalidSpec : public UsageError {
public:
    using UsageError::UsageError;
};

// Data or runtime failures (CLI exit code 3).
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

class InvalidInput : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

class FormatError : public RuntimeError {
public:
    FormatError(const std::string& what, std::size_t line = 0)
        : RuntimeError(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InfiniteDivergence : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

class InsufficientReplicates : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

class DegenerateCategory : public RuntimeError {
public:
    DegenerateCategory(const std::string& what, std::size_t category)
        : RuntimeError(what), category_(category) {}

    std::size_t category() const noexcept { return category_; }

private:
    std::size_t category_;
};

class CellSkipped : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

}  // namespace nkpower
