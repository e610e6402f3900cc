#pragma once

#include <stdexcept>
#include <string>

namespace gdf {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    InvalidInput,  ///< bad arguments, empty meshes, missing files
    Format,        ///< malformed file contents
    Numerical,     ///< divergence, non-finite outputs
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& what) : Error(ErrorKind::InvalidInput, what) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(ErrorKind::Format, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace gdf
