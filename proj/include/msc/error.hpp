#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msc {

enum class Errc {
  // npy / manifest input
  MagicMismatch,
  UnsupportedVersion,
  UnsupportedDtype,
  UnsupportedLayout,
  BadShape,
  Truncated,
  IoFailure,
  MissingColumn,
  DuplicateSubject,
  NonPositiveAge,
  MalformedRow,
  // volumes and kernels
  NonFinite,
  InvalidSpec,
  InvalidArgument,
  ShapeMismatch,
  // complexity engine
  BlockTooSmall,
  WindowTooLarge,
  WindowTooSmall,
  InvalidSchedule,
  ScheduleInfeasible,
  // statistics
  UnknownSubject,
  EmptyAfterFiltering,
  DegenerateVariance,
  TooFewPoints,
  OutOfRange,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MagicMismatch: return "MagicMismatch";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::UnsupportedDtype: return "UnsupportedDtype";
    case Errc::UnsupportedLayout: return "UnsupportedLayout";
    case Errc::BadShape: return "BadShape";
    case Errc::Truncated: return "Truncated";
    case Errc::IoFailure: return "IoFailure";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::DuplicateSubject: return "DuplicateSubject";
    case Errc::NonPositiveAge: return "NonPositiveAge";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::NonFinite: return "NonFinite";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::BlockTooSmall: return "BlockTooSmall";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::WindowTooSmall: return "WindowTooSmall";
    case Errc::InvalidSchedule: return "InvalidSchedule";
    case Errc::ScheduleInfeasible: return "ScheduleInfeasible";
    case Errc::UnknownSubject: return "UnknownSubject";
    case Errc::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::OutOfRange: return "OutOfRange";
  }
  return "Unknown";
}

/// Library-wide exception. The code is stable and machine-readable; the
/// message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return to_string(code_); }

 private:
  Errc code_;
};

}  // namespace msc
