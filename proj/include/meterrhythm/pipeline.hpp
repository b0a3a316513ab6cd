#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meterrhythm/binning.hpp"
#include "meterrhythm/ingest.hpp"

namespace meterrhythm {

/// Readings differenced, segmented and binned into local days.
struct CleanedData {
  std::vector<BinnedDay> days;
  UsageSegments usage;
};

CleanedData bin_stream(const ReadingStream& stream, const TimeZone& tz = TimeZone::utc(),
                       const SegmentOptions& opts = {});

/// Days that are Normal in `calendar` and have at least `min_valid_slots` readings.
std::vector<BinnedDay> retained_days(std::span<const BinnedDay> days, const ExclusionCalendar& calendar,
                                     int min_valid_slots = kDefaultMinValidSlots);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

}  // namespace meterrhythm
