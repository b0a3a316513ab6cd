#include "meterrhythm/error.hpp"

namespace meterrhythm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidCalendar: return "InvalidCalendar";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::SpacingTooShort: return "SpacingTooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::CounterDecrease: return "CounterDecrease";
    case ErrorCode::TooFewReadings: return "TooFewReadings";
    case ErrorCode::IntervalOutsideDay: return "IntervalOutsideDay";
    case ErrorCode::NoMatchingDays: return "NoMatchingDays";
    case ErrorCode::UnevenSpacing: return "UnevenSpacing";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateTimes: return "DegenerateTimes";
    case ErrorCode::PeriodNotOnGrid: return "PeriodNotOnGrid";
  }
  return "Unknown";
}

bool is_config_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidCalendar:
    case ErrorCode::InvalidGrid:
      return true;
    default:
      return false;
  }
}

}  // namespace meterrhythm
