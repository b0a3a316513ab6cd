#include "meterrhythm/pipeline.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <openssl/evp.h>

#include "meterrhythm/error.hpp"

namespace meterrhythm {

CleanedData bin_stream(const ReadingStream& stream, const TimeZone& tz, const SegmentOptions& opts) {
  CleanedData out;
  out.usage = segment_usage(stream, opts);
  const auto intervals = out.usage.flatten();
  out.days = bin_intervals(intervals, tz);
  return out;
}

std::vector<BinnedDay> retained_days(std::span<const BinnedDay> days, const ExclusionCalendar& calendar,
                                     int min_valid_slots) {
  std::vector<BinnedDay> kept;
  for (const auto& d : days)
    if (calendar.classify(d.date) == DayClass::Normal && d.valid_count() >= min_valid_slots) kept.push_back(d);
  return kept;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    s.push_back(hex[md[i] >> 4]);
    s.push_back(hex[md[i] & 0xF]);
  }
  return s;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open " + path);
  const std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return sha256_hex(content);
}

}  // namespace meterrhythm
