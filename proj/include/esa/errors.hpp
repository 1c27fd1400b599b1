#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace esa {

/// Root of every error the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a documented precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input data could not be read or is inconsistent.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    using InputError::InputError;
};

class DimensionError : public InputError {
public:
    using InputError::InputError;
};

/// A numerical procedure could not produce a valid result.
class NumericalError : public Error {
public:
    using Error::Error;
};

class OrientationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class RankDeficiencyError : public NumericalError {
public:
    RankDeficiencyError(const std::string& what, std::vector<std::string> columns)
        : NumericalError(what), columns_(std::move(columns)) {}
    const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    std::vector<std::string> columns_;
};

} // namespace esa
