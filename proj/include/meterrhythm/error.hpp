#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace meterrhythm {

enum class ErrorCode {
  // input / configuration
  InvalidConfig,
  InvalidCalendar,
  InvalidGrid,
  // ingest
  MalformedRow,
  NonMonotonicTimestamp,
  SpacingTooShort,
  EmptyInput,
  CounterDecrease,
  TooFewReadings,
  // binning
  IntervalOutsideDay,
  NoMatchingDays,
  // spectral
  UnevenSpacing,
  TooFewSamples,
  DegenerateTimes,
  PeriodNotOnGrid,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad configuration rather than bad data.
bool is_config_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(message), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  /// Row / element index the error refers to, when there is one.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace meterrhythm
