#pragma once

#include <stdexcept>
#include <string>

namespace cbrc {

// Base of every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct InvalidSubsetSize : Error {
    using Error::Error;
};

struct ArmOutOfRange : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct SingleClass : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// A group handed to aggregation is missing cells and was not marked partial.
struct IncompleteGroup : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct UsageError : Error {
    using Error::Error;
};

}  // namespace cbrc
