#pragma once

#include <chrono>
#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "meterrhythm/domain.hpp"

namespace meterrhythm {

struct ReadingStream {
  std::vector<RawReading> readings;  // strictly increasing timestamps
  std::string source_id;
};

enum class StreamFormat { Csv, Jsonl };

/// `.jsonl` / `.ndjson` select Jsonl, anything else Csv.
StreamFormat format_from_path(std::string_view path);

struct ParseOptions {
  /// Readings closer together than this are rejected (SpacingTooShort).
  /// Zero disables the check.
  std::chrono::seconds min_spacing{15 * 60};
};

/// Parses a reading stream. CSV rows are `timestamp,cumulative_litres` with
/// an optional header; JSONL lines are objects with `ts` and `litres_total`.
/// Errors name the 1-based data row.
ReadingStream parse_stream(std::istream& in, StreamFormat format, const ParseOptions& opts = {},
                           std::string source_id = {});
ReadingStream parse_stream(std::string_view text, StreamFormat format,
                           const ParseOptions& opts = {}, std::string source_id = {});
ReadingStream load_stream(const std::string& path, const ParseOptions& opts = {});

void write_stream(std::ostream& out, const ReadingStream& stream, StreamFormat format);

/// First difference of the cumulative counter. Throws CounterDecrease (with
/// the index of the offending reading) instead of emitting negative usage.
std::vector<IntervalUsage> difference_cumulative(const ReadingStream& stream);

struct SegmentOptions {
  /// Intervals longer than this are dropped and their volume discarded.
  std::chrono::seconds gap_threshold{45 * 60};
  /// Intervals longer than the nominal period plus this are counted as late.
  std::chrono::seconds jitter_ceiling{30};
};

struct IngestWarning {
  enum class Kind { CounterDecrease, GapDiscarded };
  Kind kind;
  std::size_t index;  // index of the reading that closes the offending interval
  Instant at;
  double litres;  // discarded volume (gap) or counter drop (decrease)
  std::string message;
};

/// Differenced stream split into runs where the counter is contiguous.
struct UsageSegments {
  std::vector<std::vector<IntervalUsage>> segments;
  std::vector<IngestWarning> warnings;
  std::size_t late_intervals = 0;

  std::vector<IntervalUsage> flatten() const;
};

/// Lenient differencing: splits at counter decreases and at gaps longer than
/// `gap_threshold` instead of failing. Within each segment the usage sums to
/// the counter delta over that segment.
UsageSegments segment_usage(const ReadingStream& stream, const SegmentOptions& opts = {});

}  // namespace meterrhythm
