#include "meterrhythm/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "meterrhythm/error.hpp"

namespace meterrhythm {

namespace {

constexpr std::chrono::seconds kNominalPeriod{15 * 60};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_litres(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] void malformed(std::size_t row, const std::string& why) {
  throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": " + why, row);
}

class StreamBuilder {
 public:
  explicit StreamBuilder(const ParseOptions& opts) : opts_(opts) {}

  void push(std::size_t row, std::optional<Instant> ts, std::optional<double> litres) {
    if (!ts) malformed(row, "bad timestamp");
    if (!litres) malformed(row, "non-numeric cumulative value");
    if (*litres < 0.0) malformed(row, "negative cumulative value");
    if (!readings_.empty()) {
      const auto prev = readings_.back().timestamp;
      if (*ts <= prev)
        throw Error(ErrorCode::NonMonotonicTimestamp,
                    "row " + std::to_string(row) + ": timestamp " + format_instant(*ts) +
                        " does not follow " + format_instant(prev),
                    row);
      if (opts_.min_spacing.count() > 0 && *ts - prev < opts_.min_spacing)
        throw Error(ErrorCode::SpacingTooShort,
                    "row " + std::to_string(row) + ": only " +
                        std::to_string((*ts - prev).count()) + " s after previous reading",
                    row);
    }
    readings_.push_back({*ts, *litres});
  }

  ReadingStream finish(std::string source_id) {
    if (readings_.empty()) throw Error(ErrorCode::EmptyInput, "no readings in input");
    return {std::move(readings_), std::move(source_id)};
  }

 private:
  const ParseOptions& opts_;
  std::vector<RawReading> readings_;
};

void parse_csv(std::istream& in, StreamBuilder& builder) {
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto comma = text.find(',');
    const std::string_view ts_field = trim(text.substr(0, comma));
    if (first) {
      first = false;
      if (ts_field == "timestamp") continue;
    }
    ++row;
    if (comma == std::string_view::npos) malformed(row, "expected two columns");
    const std::string_view value_field = text.substr(comma + 1);
    if (value_field.find(',') != std::string_view::npos) malformed(row, "expected two columns");
    builder.push(row, parse_instant(ts_field), parse_litres(value_field));
  }
}

void parse_jsonl(std::istream& in, StreamBuilder& builder) {
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      malformed(row, "invalid JSON");
    }
    if (!obj.is_object() || !obj.contains("ts") || !obj.contains("litres_total"))
      malformed(row, "expected object with 'ts' and 'litres_total'");
    const auto& ts = obj["ts"];
    const auto& litres = obj["litres_total"];
    builder.push(row, ts.is_string() ? parse_instant(ts.get<std::string>()) : std::nullopt,
                 litres.is_number() ? std::optional<double>(litres.get<double>()) : std::nullopt);
  }
}

std::string format_litres(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

StreamFormat format_from_path(std::string_view path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.substr(path.size() - suffix.size()) == suffix;
  };
  return ends_with(".jsonl") || ends_with(".ndjson") ? StreamFormat::Jsonl : StreamFormat::Csv;
}

ReadingStream parse_stream(std::istream& in, StreamFormat format, const ParseOptions& opts,
                           std::string source_id) {
  StreamBuilder builder(opts);
  if (format == StreamFormat::Csv)
    parse_csv(in, builder);
  else
    parse_jsonl(in, builder);
  return builder.finish(std::move(source_id));
}

ReadingStream parse_stream(std::string_view text, StreamFormat format, const ParseOptions& opts,
                           std::string source_id) {
  std::istringstream in{std::string(text)};
  return parse_stream(in, format, opts, std::move(source_id));
}

ReadingStream load_stream(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open readings file: " + path);
  return parse_stream(in, format_from_path(path), opts, path);
}

void write_stream(std::ostream& out, const ReadingStream& stream, StreamFormat format) {
  if (format == StreamFormat::Csv) out << "timestamp,cumulative_litres\n";
  for (const auto& r : stream.readings) {
    if (format == StreamFormat::Csv)
      out << format_instant(r.timestamp) << ',' << format_litres(r.cumulative_litres) << '\n';
    else
      out << "{\"ts\":\"" << format_instant(r.timestamp)
          << "\",\"litres_total\":" << format_litres(r.cumulative_litres) << "}\n";
  }
}

std::vector<IntervalUsage> difference_cumulative(const ReadingStream& stream) {
  const auto& r = stream.readings;
  if (r.size() < 2)
    throw Error(ErrorCode::TooFewReadings, "need at least 2 readings, got " + std::to_string(r.size()));
  std::vector<IntervalUsage> out;
  out.reserve(r.size() - 1);
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double delta = r[i + 1].cumulative_litres - r[i].cumulative_litres;
    if (delta < 0.0)
      throw Error(ErrorCode::CounterDecrease,
                  "cumulative counter drops at index " + std::to_string(i + 1) + " (" +
                      format_instant(r[i + 1].timestamp) + ")",
                  i + 1);
    out.push_back({r[i].timestamp, r[i + 1].timestamp, delta});
  }
  return out;
}

std::vector<IntervalUsage> UsageSegments::flatten() const {
  std::vector<IntervalUsage> all;
  for (const auto& s : segments) all.insert(all.end(), s.begin(), s.end());
  return all;
}

UsageSegments segment_usage(const ReadingStream& stream, const SegmentOptions& opts) {
  const auto& r = stream.readings;
  if (r.size() < 2)
    throw Error(ErrorCode::TooFewReadings, "need at least 2 readings, got " + std::to_string(r.size()));
  UsageSegments result;
  std::vector<IntervalUsage> current;
  auto close_segment = [&] {
    if (!current.empty()) result.segments.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double delta = r[i + 1].cumulative_litres - r[i].cumulative_litres;
    const auto span = r[i + 1].timestamp - r[i].timestamp;
    if (delta < 0.0) {
      close_segment();
      result.warnings.push_back({IngestWarning::Kind::CounterDecrease, i + 1, r[i + 1].timestamp,
                                 -delta,
                                 "counter decrease of " + format_litres(-delta) + " L at index " +
                                     std::to_string(i + 1) + "; stream split"});
      continue;
    }
    if (span > opts.gap_threshold) {
      close_segment();
      result.warnings.push_back({IngestWarning::Kind::GapDiscarded, i + 1, r[i + 1].timestamp, delta,
                                 "gap of " + std::to_string(span.count() / 60) + " min before index " +
                                     std::to_string(i + 1) + "; " + format_litres(delta) +
                                     " L discarded"});
      continue;
    }
    if (span > kNominalPeriod + opts.jitter_ceiling) ++result.late_intervals;
    current.push_back({r[i].timestamp, r[i + 1].timestamp, delta});
  }
  close_segment();
  return result;
}

}  // namespace meterrhythm
