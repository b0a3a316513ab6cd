#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "meterrhythm/civil_time.hpp"

namespace meterrhythm {

/// One cumulative meter sample.
struct RawReading {
  Instant timestamp;
  double cumulative_litres = 0.0;  // litres since meter activation, >= 0

  friend bool operator==(const RawReading&, const RawReading&) = default;
};

/// Volume consumed between two consecutive readings.
struct IntervalUsage {
  Instant start;
  Instant end;
  double litres = 0.0;

  std::chrono::seconds duration() const { return end - start; }
  friend bool operator==(const IntervalUsage&, const IntervalUsage&) = default;
};

enum class DayClass : std::uint8_t { Normal, Vacation, PublicHoliday, WeatherEvent, HardwareFault };

std::string_view to_string(DayClass c) noexcept;
/// Calendar-file label (`vacation`, `holiday`, `weather`, `hardware`).
std::string_view calendar_label(DayClass c) noexcept;

/// Inclusive range of calendar dates.
struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const {
    return std::chrono::sys_days{first} <= std::chrono::sys_days{d} &&
           std::chrono::sys_days{d} <= std::chrono::sys_days{last};
  }
  int days() const { return (std::chrono::sys_days{last} - std::chrono::sys_days{first}).count() + 1; }
};

/// Ground-truth labels for abnormal days; unlisted dates are Normal.
class ExclusionCalendar {
 public:
  struct Entry {
    DateRange range;
    DayClass label;
  };

  ExclusionCalendar() = default;

  /// Expands `range` to per-day labels. Throws Error(InvalidCalendar) when a
  /// day is already listed with a different label.
  void add(DateRange range, DayClass label);

  /// Reads the `YYYY-MM-DD[..YYYY-MM-DD],LABEL` text format.
  static ExclusionCalendar parse(std::istream& in);
  static ExclusionCalendar load(const std::string& path);

  DayClass classify(Date d) const;
  bool empty() const noexcept { return days_.empty(); }
  std::size_t size() const noexcept { return days_.size(); }

  /// Ranges in insertion order, as written in the source.
  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  std::map<std::chrono::sys_days, DayClass> days_;
  std::vector<Entry> entries_;
};

DayClass classify_day(const ExclusionCalendar& calendar, Date date);

/// Number of days in `span` that are Normal and fall on `weekday`.
int count_normal_days(const ExclusionCalendar& calendar, DateRange span,
                      std::chrono::weekday weekday);

}  // namespace meterrhythm
