#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "meterrhythm/error.hpp"
#include "meterrhythm/ingest.hpp"
#include "test_support.hpp"

using namespace meterrhythm;
using namespace std::chrono_literals;
using testing::at;
using testing::ymd;

namespace {

template <typename F>
Error capture(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an Error");
  return Error(ErrorCode::InvalidConfig, "unreachable");
}

ReadingStream stream_of(std::initializer_list<std::pair<Instant, double>> rows) {
  ReadingStream s;
  for (auto [t, v] : rows) s.readings.push_back({t, v});
  return s;
}

ReadingStream random_stream(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> jitter(1, 30);
  std::exponential_distribution<double> usage(0.2);
  ReadingStream s;
  Instant t = at(ymd(2017, 9, 9), 0, 0);
  double c = 123456.789;
  for (std::size_t i = 0; i < n; ++i) {
    s.readings.push_back({t, c});
    t += 15min + std::chrono::seconds{jitter(rng)};
    c += usage(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("parse_stream: minimal CSV") {
  const auto s = parse_stream("2017-09-09T00:00:07Z,100.0\n2017-09-09T00:15:12Z,101.5", StreamFormat::Csv);
  REQUIRE(s.readings.size() == 2);
  CHECK(s.readings[0].timestamp == at(ymd(2017, 9, 9), 0, 0, 7));
  CHECK(s.readings[1].cumulative_litres == 101.5);
}

TEST_CASE("parse_stream: header and offsets") {
  const auto s = parse_stream(
      "timestamp,cumulative_litres\n2017-09-09T01:00:07+01:00,100\n\n2017-09-09T00:15:12Z,101.5\n",
      StreamFormat::Csv);
  REQUIRE(s.readings.size() == 2);
  CHECK(s.readings[0].timestamp == at(ymd(2017, 9, 9), 0, 0, 7));
}

TEST_CASE("parse_stream: errors name the row") {
  auto e = capture([] {
    parse_stream("2017-09-09T00:30:00Z,100\n2017-09-09T00:00:00Z,101\n", StreamFormat::Csv);
  });
  CHECK(e.code() == ErrorCode::NonMonotonicTimestamp);
  CHECK(e.index() == 2);
  CHECK(std::string(e.what()).find("row 2") != std::string::npos);

  e = capture([] {
    parse_stream("timestamp,cumulative_litres\n2017-09-09T00:00:00Z,100\n2017-09-09T00:15:00Z,abc\n",
                 StreamFormat::Csv);
  });
  CHECK(e.code() == ErrorCode::MalformedRow);
  CHECK(e.index() == 2);

  CHECK(capture([] { parse_stream("not-a-time,1\n", StreamFormat::Csv); }).code() == ErrorCode::MalformedRow);
  CHECK(capture([] { parse_stream("2017-09-09T00:00:00Z,-1\n", StreamFormat::Csv); }).code() ==
        ErrorCode::MalformedRow);
  CHECK(capture([] { parse_stream("2017-09-09T00:00:00Z,1,2\n", StreamFormat::Csv); }).code() ==
        ErrorCode::MalformedRow);
  CHECK(capture([] { parse_stream("", StreamFormat::Csv); }).code() == ErrorCode::EmptyInput);
  CHECK(capture([] { parse_stream("timestamp,cumulative_litres\n", StreamFormat::Csv); }).code() ==
        ErrorCode::EmptyInput);
  CHECK(capture([] {
          parse_stream("2017-09-09T00:00:00Z,1\n2017-09-09T00:10:00Z,2\n", StreamFormat::Csv);
        }).code() == ErrorCode::SpacingTooShort);
}

TEST_CASE("parse_stream: spacing check can be disabled") {
  ParseOptions opts;
  opts.min_spacing = 0s;
  const auto s = parse_stream("2017-09-09T00:00:00Z,1\n2017-09-09T00:10:00Z,2\n", StreamFormat::Csv, opts);
  CHECK(s.readings.size() == 2);
}

TEST_CASE("parse_stream: JSONL") {
  const auto s = parse_stream(
      "{\"ts\":\"2017-09-09T00:00:07Z\",\"litres_total\":100.0}\n"
      "{\"ts\":\"2017-09-09T00:15:12Z\",\"litres_total\":101.5}\n",
      StreamFormat::Jsonl);
  REQUIRE(s.readings.size() == 2);
  CHECK(s.readings[1].cumulative_litres == 101.5);
  auto e = capture([] { parse_stream("{\"ts\":\"2017-09-09T00:00:07Z\"}\n", StreamFormat::Jsonl); });
  CHECK(e.code() == ErrorCode::MalformedRow);
  e = capture([] { parse_stream("{\"ts\":1,\"litres_total\":2}\n", StreamFormat::Jsonl); });
  CHECK(e.code() == ErrorCode::MalformedRow);
  e = capture([] { parse_stream("{oops\n", StreamFormat::Jsonl); });
  CHECK(e.code() == ErrorCode::MalformedRow);
}

TEST_CASE("property: write_stream then parse_stream is the identity") {
  const auto s = random_stream(500, 3);
  for (auto fmt : {StreamFormat::Csv, StreamFormat::Jsonl}) {
    std::ostringstream out;
    write_stream(out, s, fmt);
    const auto back = parse_stream(out.str(), fmt);
    CHECK(back.readings == s.readings);
  }
}

TEST_CASE("difference_cumulative examples") {
  const Instant t0 = at(ymd(2017, 9, 9), 0, 0);
  auto u = difference_cumulative(stream_of({{t0, 100.0}, {t0 + 15min, 100.0}}));
  REQUIRE(u.size() == 1);
  CHECK(u[0].litres == 0.0);
  CHECK(u[0].start == t0);
  CHECK(u[0].end == t0 + 15min);

  u = difference_cumulative(stream_of({{t0, 1000.0}, {t0 + 15min, 1003.5}, {t0 + 30min, 1010.0}}));
  REQUIRE(u.size() == 2);
  CHECK(u[0].litres == 3.5);
  CHECK(u[1].litres == 6.5);

  auto e = capture([&] { difference_cumulative(stream_of({{t0, 500.0}, {t0 + 15min, 499.0}})); });
  CHECK(e.code() == ErrorCode::CounterDecrease);
  CHECK(e.index() == 1);

  e = capture([&] { difference_cumulative(stream_of({{t0, 500.0}})); });
  CHECK(e.code() == ErrorCode::TooFewReadings);
}

TEST_CASE("property: conservation over long streams") {
  for (std::size_t n : {2u, 97u, 25000u, 1000000u}) {
    const auto s = random_stream(n, n);
    const auto u = difference_cumulative(s);
    CHECK(u.size() == n - 1);
    const double sum = std::accumulate(u.begin(), u.end(), 0.0, [](double a, const IntervalUsage& i) { return a + i.litres; });
    const double expected = s.readings.back().cumulative_litres - s.readings.front().cumulative_litres;
    CHECK(std::abs(sum - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
    CHECK(std::all_of(u.begin(), u.end(), [](const IntervalUsage& iv) {
      return iv.litres >= 0.0 && iv.duration() >= 15min;
    }));
  }
}

TEST_CASE("segment_usage splits on counter decreases") {
  const Instant t0 = at(ymd(2017, 9, 9), 0, 0);
  const auto s = stream_of({{t0, 10.0}, {t0 + 15min, 12.0}, {t0 + 30min, 3.0}, {t0 + 45min, 4.5}, {t0 + 60min, 6.0}});
  const auto r = segment_usage(s);
  REQUIRE(r.segments.size() == 2);
  CHECK(r.segments[0].size() == 1);
  CHECK(r.segments[1].size() == 2);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].kind == IngestWarning::Kind::CounterDecrease);
  CHECK(r.warnings[0].index == 2);
  for (const auto& iv : r.flatten()) CHECK(iv.litres >= 0.0);
  // each segment conserves its own counter delta
  CHECK(r.segments[1][0].litres + r.segments[1][1].litres == 3.0);
}

TEST_CASE("segment_usage discards long gaps and counts late readings") {
  const Instant t0 = at(ymd(2017, 9, 9), 0, 0);
  const auto s = stream_of({{t0, 0.0},
                            {t0 + 15min + 10s, 1.0},
                            {t0 + 45min + 40s, 3.0},     // one missed reading, kept
                            {t0 + 3h, 50.0},             // 2h14m gap, discarded
                            {t0 + 3h + 15min + 5s, 51.0}});
  const auto r = segment_usage(s);
  REQUIRE(r.segments.size() == 2);
  CHECK(r.segments[0].size() == 2);
  CHECK(r.segments[1].size() == 1);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].kind == IngestWarning::Kind::GapDiscarded);
  CHECK(r.warnings[0].litres == 47.0);
  CHECK(r.late_intervals == 1);

  SegmentOptions wide;
  wide.gap_threshold = 4h;
  CHECK(segment_usage(s, wide).segments.size() == 1);
}

TEST_CASE("format_from_path") {
  CHECK(format_from_path("a/b/readings.jsonl") == StreamFormat::Jsonl);
  CHECK(format_from_path("x.ndjson") == StreamFormat::Jsonl);
  CHECK(format_from_path("readings.csv") == StreamFormat::Csv);
}
