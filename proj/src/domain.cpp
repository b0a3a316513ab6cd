#include "meterrhythm/domain.hpp"

#include <fstream>
#include <sstream>

#include "meterrhythm/error.hpp"

namespace meterrhythm {

std::string_view to_string(DayClass c) noexcept {
  switch (c) {
    case DayClass::Normal: return "Normal";
    case DayClass::Vacation: return "Vacation";
    case DayClass::PublicHoliday: return "PublicHoliday";
    case DayClass::WeatherEvent: return "WeatherEvent";
    case DayClass::HardwareFault: return "HardwareFault";
  }
  return "Unknown";
}

std::string_view calendar_label(DayClass c) noexcept {
  switch (c) {
    case DayClass::Normal: return "normal";
    case DayClass::Vacation: return "vacation";
    case DayClass::PublicHoliday: return "holiday";
    case DayClass::WeatherEvent: return "weather";
    case DayClass::HardwareFault: return "hardware";
  }
  return "unknown";
}

void ExclusionCalendar::add(DateRange range, DayClass label) {
  const std::chrono::sys_days first{range.first}, last{range.last};
  if (last < first)
    throw Error(ErrorCode::InvalidCalendar,
                "range end " + format_date(range.last) + " precedes start " + format_date(range.first));
  for (auto d = first; d <= last; d += std::chrono::days{1}) {
    auto it = days_.find(d);
    if (it != days_.end() && it->second != label)
      throw Error(ErrorCode::InvalidCalendar,
                  "conflicting labels for " + format_date(Date{d}) + ": " +
                      std::string(calendar_label(it->second)) + " vs " +
                      std::string(calendar_label(label)));
  }
  for (auto d = first; d <= last; d += std::chrono::days{1}) days_[d] = label;
  entries_.push_back({range, label});
}

namespace {

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

DayClass parse_label(const std::string& label, std::size_t line_no) {
  if (label == "vacation") return DayClass::Vacation;
  if (label == "holiday") return DayClass::PublicHoliday;
  if (label == "weather") return DayClass::WeatherEvent;
  if (label == "hardware") return DayClass::HardwareFault;
  throw Error(ErrorCode::InvalidCalendar,
              "line " + std::to_string(line_no) + ": unknown label '" + label + "'", line_no);
}

}  // namespace

ExclusionCalendar ExclusionCalendar::parse(std::istream& in) {
  ExclusionCalendar cal;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trimmed(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::InvalidCalendar,
                  "line " + std::to_string(line_no) + ": expected DATE[..DATE],LABEL", line_no);
    const std::string dates = trimmed(line.substr(0, comma));
    const std::string label = trimmed(line.substr(comma + 1));
    const auto dots = dates.find("..");
    const auto first = parse_date(dates.substr(0, dots));
    const auto last = dots == std::string::npos ? first : parse_date(dates.substr(dots + 2));
    if (!first || !last)
      throw Error(ErrorCode::InvalidCalendar,
                  "line " + std::to_string(line_no) + ": bad date '" + dates + "'", line_no);
    try {
      cal.add({*first, *last}, parse_label(label, line_no));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return cal;
}

ExclusionCalendar ExclusionCalendar::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open calendar file: " + path);
  return parse(in);
}

DayClass ExclusionCalendar::classify(Date d) const {
  auto it = days_.find(std::chrono::sys_days{d});
  return it == days_.end() ? DayClass::Normal : it->second;
}

DayClass classify_day(const ExclusionCalendar& calendar, Date date) {
  return calendar.classify(date);
}

int count_normal_days(const ExclusionCalendar& calendar, DateRange span,
                      std::chrono::weekday weekday) {
  int n = 0;
  const std::chrono::sys_days last{span.last};
  for (std::chrono::sys_days d{span.first}; d <= last; d += std::chrono::days{1}) {
    if (std::chrono::weekday{d} == weekday && calendar.classify(Date{d}) == DayClass::Normal) ++n;
  }
  return n;
}

}  // namespace meterrhythm
