#pragma once

#include <array>
#include <bitset>
#include <chrono>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "meterrhythm/domain.hpp"

namespace meterrhythm {

/// A local calendar day split into 96 15-minute slots; slot k covers local
/// clock time [15k, 15k + 15) minutes. Slots that received no reading are
/// std::nullopt ("n/a"), never zero.
struct BinnedDay {
  Date date;
  std::array<std::optional<double>, kBinsPerDay> bins{};

  std::chrono::weekday weekday() const { return weekday_of(date); }
  int valid_count() const;
};

inline constexpr int kDefaultMinValidSlots = 92;

/// Assigns each interval's volume to the slot containing its closing reading.
/// Throws IntervalOutsideDay if a closing reading falls on another local date.
BinnedDay bin_day(std::span<const IntervalUsage> intervals, Date date,
                  const TimeZone& tz = TimeZone::utc());

/// Groups intervals by the local date of their closing reading and bins each
/// date that received at least one reading. Result is ordered by date.
std::vector<BinnedDay> bin_intervals(std::span<const IntervalUsage> intervals,
                                     const TimeZone& tz = TimeZone::utc());

/// Set of weekdays a profile aggregates over.
class WeekdaySet {
 public:
  WeekdaySet() = default;
  static WeekdaySet weekdays();  // Mon..Fri
  static WeekdaySet single(std::chrono::weekday wd);
  static WeekdaySet all();

  WeekdaySet& add(std::chrono::weekday wd) {
    bits_.set(wd.c_encoding());
    return *this;
  }
  bool contains(std::chrono::weekday wd) const { return bits_.test(wd.c_encoding()); }
  bool empty() const { return bits_.none(); }

 private:
  std::bitset<7> bits_;
};

enum class StdEstimator { Population, Sample };

struct DayProfile {
  std::string group;
  std::array<std::optional<double>, kBinsPerDay> mean{};
  std::array<std::optional<double>, kBinsPerDay> std{};
  std::array<int, kBinsPerDay> contributing{};  // non-missing values per bin
  int n_days = 0;
  StdEstimator estimator = StdEstimator::Population;
};

/// Per-bin mean and standard deviation over the non-missing values of the
/// days whose weekday is in `selector`. Days are reduced in date order, so the
/// result does not depend on the order of `days`.
DayProfile profile(std::span<const BinnedDay> days, WeekdaySet selector,
                   StdEstimator estimator = StdEstimator::Population, std::string group = {});

/// The three default groups.
enum class DayGroup { Weekday, Saturday, Sunday };
WeekdaySet selector_for(DayGroup g);
std::string_view to_string(DayGroup g);

/// `bin_index,local_time,mean_litres,std_litres,n_days`; missing bins are `n/a`.
void write_profile_csv(std::ostream& out, const DayProfile& p);

/// Long format `date,weekday,bin_index,local_time,litres`.
void write_binned_csv(std::ostream& out, std::span<const BinnedDay> days);

}  // namespace meterrhythm
