#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trinity {

/// Domain failures raised by the library. The CLI maps every kind to exit code 1.
enum class ErrorKind {
    InvalidArgument,
    Infeasible,
    NegativeCapacity,
    NonDifferentiableModel,
    DegeneratePoints,
    DimensionMismatch,
    EntryTooLarge,
    ZeroNormEmbedding,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace trinity
