#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace meterrhythm {

using Instant = std::chrono::sys_seconds;
using LocalTime = std::chrono::local_seconds;
using Date = std::chrono::year_month_day;

inline constexpr int kBinsPerDay = 96;
inline constexpr std::chrono::minutes kBinWidth{15};

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM|+HHMM)`; a space may
/// replace the `T`. Fractional seconds are truncated.
std::optional<Instant> parse_instant(std::string_view text);
/// UTC, `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_instant(Instant t);

std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

std::chrono::weekday weekday_of(Date d);
std::string_view weekday_name(std::chrono::weekday wd);
/// `HH:MM` for the start of a 15-minute slot.
std::string slot_clock(int slot);

/// The civil time zone in which days and bins are anchored.
///
/// Accepts `UTC`, a fixed offset (`+01:00`, `-0500`) or a POSIX TZ rule
/// such as `GMT0IST,M3.5.0/1,M10.5.0` (Europe/Dublin). Immutable and cheap
/// to copy.
class TimeZone {
 public:
  TimeZone();  // UTC

  static TimeZone utc() { return TimeZone{}; }
  static TimeZone fixed(std::chrono::minutes offset);
  /// Throws Error(InvalidConfig) if the spec cannot be understood.
  static TimeZone parse(const std::string& spec);

  LocalTime to_local(Instant t) const;
  /// Nonexistent local times (spring-forward gap) are read on the
  /// pre-transition clock (shifted forward by the gap); ambiguous ones (fall-back) to the earlier instant.
  Instant to_utc(LocalTime t) const;

  const std::string& name() const noexcept { return name_; }

 private:
  struct Rules;
  std::string name_;
  std::chrono::minutes fixed_offset_{0};
  std::shared_ptr<const Rules> rules_;
};

/// Local calendar date and 15-minute slot of an instant.
struct LocalSlot {
  Date date;
  int slot = 0;
};

LocalSlot local_slot(Instant t, const TimeZone& tz);

inline LocalTime local_midnight(Date d) {
  return LocalTime{std::chrono::local_days{d}.time_since_epoch()};
}

}  // namespace meterrhythm
