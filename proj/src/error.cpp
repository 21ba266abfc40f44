#include "eigengaze/error.hpp"

namespace eigengaze {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::SampleCountMismatch: return "SampleCountMismatch";
    case ErrorCode::SampleOutOfRange: return "SampleOutOfRange";
    case ErrorCode::ZeroImage: return "ZeroImage";
    case ErrorCode::EmptyOcclusion: return "EmptyOcclusion";
    case ErrorCode::SideTooSmall: return "SideTooSmall";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::DegenerateSet: return "DegenerateSet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NormModeMismatch: return "NormModeMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptField: return "CorruptField";
    case ErrorCode::DuplicateObject: return "DuplicateObject";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyRegistryNoViews: return "EmptyRegistryNoViews";
    case ErrorCode::EmptyRegistry: return "EmptyRegistry";
    case ErrorCode::EmptyQuerySet: return "EmptyQuerySet";
    case ErrorCode::DimsTooLarge: return "DimsTooLarge";
    case ErrorCode::NoImages: return "NoImages";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace eigengaze
