#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eigengaze {

enum class ErrorCode {
  InvalidArgument,
  // imgio
  MalformedHeader,
  SampleCountMismatch,
  SampleOutOfRange,
  ZeroImage,
  EmptyOcclusion,
  SideTooSmall,
  // linalg
  NoConvergence,
  AllZero,
  // eigenspace
  DegenerateSet,
  DimensionMismatch,
  NormModeMismatch,
  BadMagic,
  VersionMismatch,
  CorruptField,
  // registry
  DuplicateObject,
  InsufficientData,
  EmptyRegistryNoViews,
  // recog
  EmptyRegistry,
  EmptyQuerySet,
  DimsTooLarge,
  // cli
  NoImages,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace eigengaze
