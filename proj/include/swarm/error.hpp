#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swarm {

enum class ErrorCode {
  InvalidArgument,
  NegativeAmount,
  RhoOutOfRange,
  AlphaOutOfRange,
  OutOfRange,
  DimensionMismatch,
  PatchMismatch,
  TooFewItems,
  NotAPermutation,
  EmptyPopulation,
  CutOutOfRange,
  LengthMismatch,
  IndexOutOfRange,
  CorruptLog,
  MalformedDocument,
  MalformedImage,
  InvalidConfig,
  IoFailure,
  PortUnavailable,
  BadLexicon,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeAmount: return "NegativeAmount";
    case ErrorCode::RhoOutOfRange: return "RhoOutOfRange";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::PatchMismatch: return "PatchMismatch";
    case ErrorCode::TooFewItems: return "TooFewItems";
    case ErrorCode::NotAPermutation: return "NotAPermutation";
    case ErrorCode::EmptyPopulation: return "EmptyPopulation";
    case ErrorCode::CutOutOfRange: return "CutOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::MalformedImage: return "MalformedImage";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::PortUnavailable: return "PortUnavailable";
    case ErrorCode::BadLexicon: return "BadLexicon";
  }
  return "Unknown";
}

// Every precondition failure in the library surfaces as this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace swarm
