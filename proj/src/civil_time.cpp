#include "meterrhythm/civil_time.hpp"

#include <array>
#include <boost/date_time/local_time/local_time.hpp>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "meterrhythm/error.hpp"

namespace meterrhythm {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Parses "+HH:MM", "-HHMM", "+HH" into minutes east of UTC.
std::optional<std::chrono::minutes> parse_offset(std::string_view s) {
  if (s.empty() || (s[0] != '+' && s[0] != '-')) return std::nullopt;
  const int sign = s[0] == '-' ? -1 : 1;
  int hh = 0, mm = 0;
  if (!read_int(s, 1, 2, hh)) return std::nullopt;
  if (s.size() == 3) {
    // hours only
  } else if (s.size() == 6 && s[3] == ':') {
    if (!read_int(s, 4, 2, mm)) return std::nullopt;
  } else if (s.size() == 5) {
    if (!read_int(s, 3, 2, mm)) return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59) return std::nullopt;
  return std::chrono::minutes{sign * (hh * 60 + mm)};
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  text = trim(text);
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, m) || !read_int(text, 8, 2, d))
    return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(Date d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<Instant> parse_instant(std::string_view text) {
  text = trim(text);
  if (text.size() < 20) return std::nullopt;
  auto date = parse_date(text.substr(0, 10));
  if (!date) return std::nullopt;
  if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
  int hh = 0, mi = 0, ss = 0;
  if (!read_int(text, 11, 2, hh) || text[13] != ':' || !read_int(text, 14, 2, mi) ||
      text[16] != ':' || !read_int(text, 17, 2, ss))
    return std::nullopt;
  if (hh > 23 || mi > 59 || ss > 60) return std::nullopt;
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t digits_start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == digits_start) return std::nullopt;
  }
  std::string_view zone = text.substr(pos);
  std::chrono::minutes offset{0};
  if (zone == "Z" || zone == "z") {
    offset = std::chrono::minutes{0};
  } else if (auto off = parse_offset(zone)) {
    offset = *off;
  } else {
    return std::nullopt;
  }
  const auto local = std::chrono::sys_days{*date} + std::chrono::hours{hh} +
                     std::chrono::minutes{mi} + std::chrono::seconds{ss};
  return Instant{local - offset};
}

std::string format_instant(Instant t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const Date d{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(d).c_str(),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::chrono::weekday weekday_of(Date d) { return std::chrono::weekday{std::chrono::sys_days{d}}; }

std::string_view weekday_name(std::chrono::weekday wd) {
  static constexpr std::array<std::string_view, 7> names{
      "Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday"};
  return names[wd.c_encoding()];
}

std::string slot_clock(int slot) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d", slot / 4, (slot % 4) * 15);
  return buf;
}

struct TimeZone::Rules {
  boost::local_time::time_zone_ptr zone;
};

TimeZone::TimeZone() : name_("UTC") {}

TimeZone TimeZone::fixed(std::chrono::minutes offset) {
  TimeZone tz;
  tz.fixed_offset_ = offset;
  const auto a = offset.count() < 0 ? -offset.count() : offset.count();
  char buf[48];
  std::snprintf(buf, sizeof buf, "%c%02lld:%02lld", offset.count() < 0 ? '-' : '+',
                static_cast<long long>(a / 60), static_cast<long long>(a % 60));
  tz.name_ = buf;
  return tz;
}

TimeZone TimeZone::parse(const std::string& spec) {
  if (spec.empty() || spec == "UTC" || spec == "utc" || spec == "Z") return utc();
  if (auto off = parse_offset(spec)) return fixed(*off);
  try {
    TimeZone tz;
    auto rules = std::make_shared<Rules>();
    rules->zone = boost::local_time::time_zone_ptr(new boost::local_time::posix_time_zone(spec));
    tz.rules_ = std::move(rules);
    tz.name_ = spec;
    return tz;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "unrecognised time zone '" + spec + "': " + e.what());
  }
}

namespace {

boost::posix_time::ptime to_ptime(std::chrono::seconds since_epoch) {
  static const boost::posix_time::ptime epoch(boost::gregorian::date(1970, 1, 1));
  return epoch + boost::posix_time::seconds(static_cast<long>(since_epoch.count()));
}

std::chrono::seconds from_ptime(const boost::posix_time::ptime& p) {
  static const boost::posix_time::ptime epoch(boost::gregorian::date(1970, 1, 1));
  return std::chrono::seconds{(p - epoch).total_seconds()};
}

}  // namespace

LocalTime TimeZone::to_local(Instant t) const {
  if (!rules_) return LocalTime{t.time_since_epoch() + fixed_offset_};
  boost::local_time::local_date_time ldt(to_ptime(t.time_since_epoch()), rules_->zone);
  return LocalTime{from_ptime(ldt.local_time())};
}

Instant TimeZone::to_utc(LocalTime t) const {
  if (!rules_) return Instant{t.time_since_epoch() - fixed_offset_};
  // Try the standard and daylight offsets; keep candidates that round-trip.
  const auto std_off = std::chrono::seconds{rules_->zone->base_utc_offset().total_seconds()};
  const auto dst_off =
      std_off + std::chrono::seconds{rules_->zone->dst_offset().total_seconds()};
  std::optional<Instant> best;
  for (auto off : {std_off, dst_off}) {
    const Instant cand{t.time_since_epoch() - off};
    if (to_local(cand) == t && (!best || cand < *best)) best = cand;
  }
  if (best) return *best;
  // Inside a spring-forward gap: read t on the pre-transition clock.
  return Instant{t.time_since_epoch() - std_off};
}

LocalSlot local_slot(Instant t, const TimeZone& tz) {
  const auto local = tz.to_local(t);
  const auto day = std::chrono::floor<std::chrono::days>(local);
  const auto minutes = std::chrono::duration_cast<std::chrono::minutes>(local - day);
  return {Date{day}, static_cast<int>(minutes / kBinWidth)};
}

}  // namespace meterrhythm
