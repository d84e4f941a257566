#include "trinity/error.hpp"

namespace trinity {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::NegativeCapacity: return "NegativeCapacity";
        case ErrorKind::NonDifferentiableModel: return "NonDifferentiableModel";
        case ErrorKind::DegeneratePoints: return "DegeneratePoints";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EntryTooLarge: return "EntryTooLarge";
        case ErrorKind::ZeroNormEmbedding: return "ZeroNormEmbedding";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace trinity
