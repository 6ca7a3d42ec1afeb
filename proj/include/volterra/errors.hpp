#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace volterra {

enum class ErrorKind {
  // configuration
  InvalidArgument,
  InvalidMemory,
  WindowTooLong,
  InvalidFamilySize,
  NonStationarySpec,
  UnsupportedKernel,
  FeatureSpaceTooLarge,
  // data
  LengthMismatch,
  EmptyInput,
  EmptySample,
  DimensionMismatch,
  NonFiniteInput,
  InsufficientData,
  ParseError,
  EmptyFile,
  NonFiniteValue,
  // numerical
  Overflow,
  SingularSystem,
  // io
  Io,
};

/// Coarse grouping of error kinds; the CLI maps each category to an exit code.
enum class ErrorCategory { Config, Data, Numerical, Io };

constexpr ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidMemory:
    case ErrorKind::WindowTooLong:
    case ErrorKind::InvalidFamilySize:
    case ErrorKind::NonStationarySpec:
    case ErrorKind::UnsupportedKernel:
    case ErrorKind::FeatureSpaceTooLarge:
      return ErrorCategory::Config;
    case ErrorKind::LengthMismatch:
    case ErrorKind::EmptyInput:
    case ErrorKind::EmptySample:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NonFiniteInput:
    case ErrorKind::InsufficientData:
    case ErrorKind::ParseError:
    case ErrorKind::EmptyFile:
    case ErrorKind::NonFiniteValue:
      return ErrorCategory::Data;
    case ErrorKind::Overflow:
    case ErrorKind::SingularSystem:
      return ErrorCategory::Numerical;
    case ErrorKind::Io:
      return ErrorCategory::Io;
  }
  return ErrorCategory::Config;
}

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace volterra
