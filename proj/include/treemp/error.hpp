#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treemp {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  RankDeficient,
  InsufficientCandidates,
  ZeroSignal,
  EmptyBatch,
  EmptyPreselection,
  TooLarge,
  CausalNotTrue,
  MissingRicOrder,
  InvalidConfig,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::EmptyPreselection: return "EmptyPreselection";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::CausalNotTrue: return "CausalNotTrue";
    case ErrorCode::MissingRicOrder: return "MissingRicOrder";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report it in a machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace treemp
