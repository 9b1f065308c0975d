#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace augmotion {

enum class ErrorKind {
  kInvalidArgument,
  kUnknownJoint,
  kParse,
  kSchema,
  kValidation,
  kIo,
  kEmptyInput,
  kDegenerate,
  kOutOfBounds,
  kShapeMismatch,
  kSpecMismatch,
  kFlatChannel,
  kNonFinite,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` lets callers (the CLI in
/// particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace augmotion
