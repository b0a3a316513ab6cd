#include "meterrhythm/binning.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "meterrhythm/error.hpp"

namespace meterrhythm {

int BinnedDay::valid_count() const {
  return static_cast<int>(std::count_if(bins.begin(), bins.end(), [](const auto& b) { return b.has_value(); }));
}

BinnedDay bin_day(std::span<const IntervalUsage> intervals, Date date, const TimeZone& tz) {
  BinnedDay day{date, {}};
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto pos = local_slot(intervals[i].end, tz);
    if (pos.date != date)
      throw Error(ErrorCode::IntervalOutsideDay,
                  "interval " + std::to_string(i) + " closes at " + format_instant(intervals[i].end) +
                      ", outside " + format_date(date),
                  i);
    auto& slot = day.bins[static_cast<std::size_t>(pos.slot)];
    // Two readings can only share a slot when the local clock repeats an hour.
    slot = slot.value_or(0.0) + intervals[i].litres;
  }
  return day;
}

std::vector<BinnedDay> bin_intervals(std::span<const IntervalUsage> intervals, const TimeZone& tz) {
  std::map<std::chrono::sys_days, std::vector<IntervalUsage>> by_date;
  for (const auto& iv : intervals) by_date[std::chrono::sys_days{local_slot(iv.end, tz).date}].push_back(iv);
  std::vector<BinnedDay> days;
  days.reserve(by_date.size());
  for (const auto& [d, ivs] : by_date) days.push_back(bin_day(ivs, Date{d}, tz));
  return days;
}

WeekdaySet WeekdaySet::weekdays() {
  WeekdaySet s;
  for (unsigned wd = 1; wd <= 5; ++wd) s.add(std::chrono::weekday{wd});
  return s;
}

WeekdaySet WeekdaySet::single(std::chrono::weekday wd) { return WeekdaySet{}.add(wd); }

WeekdaySet WeekdaySet::all() {
  WeekdaySet s;
  for (unsigned wd = 0; wd < 7; ++wd) s.add(std::chrono::weekday{wd});
  return s;
}

DayProfile profile(std::span<const BinnedDay> days, WeekdaySet selector, StdEstimator estimator,
                   std::string group) {
  std::vector<const BinnedDay*> matching;
  for (const auto& d : days)
    if (selector.contains(d.weekday())) matching.push_back(&d);
  if (matching.empty()) throw Error(ErrorCode::NoMatchingDays, "no days match profile selector");
  std::sort(matching.begin(), matching.end(), [](const BinnedDay* a, const BinnedDay* b) {
    return std::chrono::sys_days{a->date} < std::chrono::sys_days{b->date};
  });

  DayProfile p;
  p.group = std::move(group);
  p.n_days = static_cast<int>(matching.size());
  p.estimator = estimator;
  for (std::size_t k = 0; k < kBinsPerDay; ++k) {
    double sum = 0.0;
    int n = 0;
    for (const auto* d : matching) {
      if (d->bins[k]) {
        sum += *d->bins[k];
        ++n;
      }
    }
    p.contributing[k] = n;
    if (n == 0) continue;
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto* d : matching) {
      if (d->bins[k]) {
        const double dev = *d->bins[k] - mean;
        ss += dev * dev;
      }
    }
    p.mean[k] = mean;
    if (estimator == StdEstimator::Population)
      p.std[k] = std::sqrt(ss / n);
    else if (n > 1)
      p.std[k] = std::sqrt(ss / (n - 1));
  }
  return p;
}

WeekdaySet selector_for(DayGroup g) {
  switch (g) {
    case DayGroup::Weekday: return WeekdaySet::weekdays();
    case DayGroup::Saturday: return WeekdaySet::single(std::chrono::Saturday);
    case DayGroup::Sunday: return WeekdaySet::single(std::chrono::Sunday);
  }
  return {};
}

std::string_view to_string(DayGroup g) {
  switch (g) {
    case DayGroup::Weekday: return "weekday";
    case DayGroup::Saturday: return "saturday";
    case DayGroup::Sunday: return "sunday";
  }
  return "unknown";
}

namespace {
std::string cell(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : "n/a"; }
}  // namespace

void write_profile_csv(std::ostream& out, const DayProfile& p) {
  out << "bin_index,local_time,mean_litres,std_litres,n_days\n";
  for (int k = 0; k < kBinsPerDay; ++k) {
    out << k << ',' << slot_clock(k) << ',' << cell(p.mean[k]) << ',' << cell(p.std[k]) << ','
        << p.n_days << '\n';
  }
}

void write_binned_csv(std::ostream& out, std::span<const BinnedDay> days) {
  out << "date,weekday,bin_index,local_time,litres\n";
  for (const auto& d : days) {
    const auto date = format_date(d.date);
    const auto wd = weekday_name(d.weekday());
    for (int k = 0; k < kBinsPerDay; ++k)
      out << date << ',' << wd << ',' << k << ',' << slot_clock(k) << ',' << cell(d.bins[k]) << '\n';
  }
}

}  // namespace meterrhythm
