#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "meterrhythm/civil_time.hpp"
#include "meterrhythm/ingest.hpp"
#include "meterrhythm/pipeline.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace meterrhythm;

namespace {

// readings.csv of `simulate --scenario fixtures/scenarios/week.json`; pinned
// once from a verified run. Depends on libstdc++'s distribution algorithms.
const std::string kWeekGolden = "08f1567e7c51e1ceb1bed99a11173e7927ef73488a31aba8b5e51468ac3d0f43";

struct Result {
  int exit_code;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "meterrhythm_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Result run(const std::string& args) {
  const auto dir = fs::temp_directory_path() / "meterrhythm_cli_test";
  fs::create_directories(dir);
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("SOURCE_DATE_EPOCH=1500000000 ") + METERRHYTHM_CLI + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(f, line);
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

/// Readings from 00:00 on `first` to 23:45 on the last day, usage per slot from `usage`.
template <typename Usage>
fs::path write_readings(const fs::path& dir, Date first, int n_days, Usage usage) {
  ReadingStream s;
  double total = 100.0;
  s.readings.push_back({testing::at(first, 0, 0), total});
  for (int i = 1; i < n_days * 96; ++i) {
    total += usage(i);
    s.readings.push_back({testing::at(first, 0, 0) + std::chrono::minutes{15 * i}, total});
  }
  const auto path = dir / "readings.csv";
  std::ofstream f(path);
  write_stream(f, s, StreamFormat::Csv);
  return path;
}

double daily_usage(int i) {
  const double t = 0.25 * i;
  return 2.0 + std::cos(2.0 * std::numbers::pi * t / 24.0) + 0.3 * std::sin(i * 1.7);
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("simulate: fixture scenario matches the golden digest") {
  const auto dir = scratch("simulate");
  const auto r = run("simulate --scenario " METERRHYTHM_FIXTURES "/scenarios/week.json --out " + q(dir));
  REQUIRE(r.exit_code == 0);
  const auto digest = sha256_file((dir / "readings.csv").string());
  CHECK(digest == kWeekGolden);

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["generated_at"] == "2017-07-14T02:40:00Z");
  CHECK(manifest["outputs"][0]["sha256"] == digest);
  CHECK(manifest["inputs"][0]["sha256"].get<std::string>().size() == 64);
  CHECK(manifest.contains("config_digest"));

  // rerun is byte-identical, manifest included
  const auto again = scratch("simulate_again");
  REQUIRE(run("simulate --scenario " METERRHYTHM_FIXTURES "/scenarios/week.json --out " + q(again)).exit_code == 0);
  CHECK(slurp(again / "readings.csv") == slurp(dir / "readings.csv"));
  CHECK(slurp(again / "manifest.json").size() == slurp(dir / "manifest.json").size());

  const auto other = scratch("simulate_seed");
  REQUIRE(run("simulate --seed 8 --scenario " METERRHYTHM_FIXTURES "/scenarios/week.json --out " + q(other))
              .exit_code == 0);
  CHECK(sha256_file((other / "readings.csv").string()) != digest);

  const auto jsonl = scratch("simulate_jsonl");
  REQUIRE(run("simulate --format jsonl --scenario " METERRHYTHM_FIXTURES "/scenarios/week.json --out " + q(jsonl))
              .exit_code == 0);
  std::ifstream in(jsonl / "readings.jsonl");
  const auto parsed = parse_stream(in, StreamFormat::Jsonl);
  std::ifstream csv_in(dir / "readings.csv");
  const auto csv = parse_stream(csv_in, StreamFormat::Csv);
  REQUIRE(parsed.readings.size() == csv.readings.size());
  CHECK(parsed.readings.back().cumulative_litres == csv.readings.back().cumulative_litres);
}

TEST_CASE("simulate: missing scenario exits 2 and names the path") {
  const auto r = run("simulate --scenario /no/such/scenario.json --out " + q(scratch("missing")));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("/no/such/scenario.json") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("").exit_code == 2);
  CHECK(run("track --out /tmp/x").exit_code == 2);  // --input missing
  CHECK(run("frobnicate").exit_code == 2);
}

TEST_CASE("ingest writes intervals, bins and a report") {
  const auto dir = scratch("ingest");
  const auto input = write_readings(dir, testing::ymd(2018, 2, 5), 3, daily_usage);
  const auto r = run("ingest --input " + q(input) + " --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  for (const char* f : {"intervals.csv", "binned.csv", "ingest_report.json", "manifest.json"})
    CHECK(fs::exists(dir / "out" / f));
  CHECK(read_csv(dir / "out" / "intervals.csv").size() == 3 * 96 - 1);

  std::ofstream(dir / "bad.csv") << "timestamp,litres\n2018-02-05T00:00:00Z,10\n2018-02-05T00:15:00Z,11\n2018-02-05T00:10:00Z,12\n";
  const auto bad = run("ingest --json-errors --input " + q(dir / "bad.csv") + " --out " + q(dir / "out2"));
  CHECK(bad.exit_code == 3);
  CHECK(nlohmann::json::parse(bad.err)["error"] == "NonMonotonicTimestamp");

  // a counter reset is a warning and a segment boundary, not an error
  std::ofstream(dir / "reset.csv") << "timestamp,litres\n2018-02-05T00:00:00Z,10\n2018-02-05T00:15:00Z,11\n"
                                      "2018-02-05T00:30:00Z,2\n2018-02-05T00:45:00Z,3\n";
  REQUIRE(run("ingest --input " + q(dir / "reset.csv") + " --out " + q(dir / "out3")).exit_code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "out3" / "ingest_report.json"));
  CHECK(report["segments"] == 2);
  CHECK(report["warnings"].size() == 1);
}

TEST_CASE("profile: three files with distinct weekday and weekend peaks") {
  const auto dir = scratch("profile");
  REQUIRE(run("simulate --scenario " METERRHYTHM_FIXTURES "/scenarios/household_2017.json --out " + q(dir / "sim"))
              .exit_code == 0);
  const auto input = dir / "sim" / "readings.csv";
  const auto r = run("profile --input " + q(input) + " --calendar " METERRHYTHM_FIXTURES
                     "/calendar_2017_2018.txt --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  auto peak = [&](const std::string& group) {
    const auto rows = read_csv(dir / "out" / ("profile_" + group + ".csv"));
    REQUIRE(rows.size() == 96);
    std::size_t best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (std::stod(rows[i][2]) > std::stod(rows[best][2])) best = i;
    return std::make_pair(best, std::stoi(rows[best][4]));
  };
  const auto [wd, wd_days] = peak("weekday");
  const auto [sat, sat_days] = peak("saturday");
  const auto [sun, sun_days] = peak("sunday");
  CHECK(wd == 28);
  CHECK(sat == 40);
  CHECK(sun == 40);
  CHECK(wd != sat);
  CHECK(wd_days == 28 + 34 + 34 + 34 + 31);
  CHECK(sat_days == 33);
  CHECK(sun_days == 32);
}

TEST_CASE("profile: everything excluded exits 3") {
  const auto dir = scratch("profile_excluded");
  const auto input = write_readings(dir, testing::ymd(2018, 2, 5), 3, daily_usage);
  std::ofstream(dir / "cal.txt") << "2018-02-01..2018-02-28,hardware\n";
  const auto r = run("profile --json-errors --input " + q(input) + " --calendar " + q(dir / "cal.txt") +
                     " --out " + q(dir / "out"));
  CHECK(r.exit_code == 3);
  const auto err = nlohmann::json::parse(r.err);
  CHECK(err["error"] == "NoMatchingDays");
  CHECK(err["exit_code"] == 3);
}

TEST_CASE("profile: a single day has zero spread") {
  const auto dir = scratch("profile_single");
  // Wednesday 00:00 through Thursday 00:00 fills every Wednesday slot
  ReadingStream s;
  for (int i = 0; i <= 96; ++i)
    s.readings.push_back({testing::at(testing::ymd(2018, 2, 7), 0, 0) + std::chrono::minutes{15 * i}, 10.0 * i});
  std::ofstream(dir / "one.csv") << [&] {
    std::ostringstream o;
    write_stream(o, s, StreamFormat::Csv);
    return o.str();
  }();
  const auto r = run("profile --input " + q(dir / "one.csv") + " --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  const auto rows = read_csv(dir / "out" / "profile_weekday.csv");
  REQUIRE(rows.size() == 96);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][3] == "0");
    CHECK(rows[i][4] == "1");
  }
}

TEST_CASE("periodogram of one window") {
  const auto dir = scratch("periodogram");
  const auto input = write_readings(dir, testing::ymd(2018, 2, 5), 12, daily_usage);
  const auto r = run("periodogram --input " + q(input) + " --window-start 2018-02-06 --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  const auto rows = read_csv(dir / "out" / "periodogram.csv");
  std::size_t best = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (std::stod(rows[i][2]) > std::stod(rows[best][2])) best = i;
  CHECK(rows[best][1] == "24");
  const auto meta = nlohmann::json::parse(slurp(dir / "out" / "periodogram.json"));
  CHECK(meta["window_first"] == "2018-02-06");
  CHECK(meta["estimator"] == "ls");
}

TEST_CASE("track: 30 contiguous days give 21 points") {
  const auto dir = scratch("track30");
  const auto input = write_readings(dir, testing::ymd(2018, 2, 5), 30, daily_usage);
  const auto r = run("track --input " + q(input) + " --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);
  const auto rows = read_csv(dir / "out" / "intensity.csv");
  CHECK(rows.size() == 21 * 2);
  CHECK(rows.front()[0] == "2018-02-05");
  CHECK(rows.back()[0] == "2018-02-25");
  CHECK(std::none_of(rows.begin(), rows.end(), [](auto& row) { return row[4] == "1"; }));
}

TEST_CASE("track: invalid window config exits 2") {
  const auto dir = scratch("track_bad");
  const auto input = write_readings(dir, testing::ymd(2018, 2, 5), 12, daily_usage);
  CHECK(run("track --stride-days 0 --input " + q(input) + " --out " + q(dir / "out")).exit_code == 2);
  CHECK(run("track --estimator fft --input " + q(input) + " --out " + q(dir / "out")).exit_code == 2);
  const auto r = run("track --json-errors --window-days 1 --input " + q(input) + " --out " + q(dir / "out"));
  CHECK(r.exit_code == 2);
  CHECK(nlohmann::json::parse(r.err)["error"] == "InvalidConfig");
}

TEST_CASE("track: vacation windows lose 24 h power and are annotated") {
  const auto dir = scratch("track_vacation");
  std::ofstream(dir / "scenario.json") << R"({
    "start": "2018-01-01", "end": "2018-02-19", "seed": 5,
    "templates": ")" << METERRHYTHM_FIXTURES << R"(/templates/household_v1.json",
    "noise_sd": 3.0, "vacations": [["2018-01-21", "2018-02-04"]], "initial_litres": 40000
  })";
  std::ofstream(dir / "cal.txt") << "2018-01-21..2018-02-04,vacation\n";
  REQUIRE(run("simulate --scenario " + q(dir / "scenario.json") + " --out " + q(dir / "sim")).exit_code == 0);
  const auto r = run("track --include-labels vacation --periods 24 --input " + q(dir / "sim" / "readings.csv") +
                     " --calendar " + q(dir / "cal.txt") + " --out " + q(dir / "out"));
  REQUIRE(r.exit_code == 0);

  const auto first_vac = testing::ymd(2018, 1, 21), last_vac = testing::ymd(2018, 2, 4);
  std::vector<double> inside, normal;
  for (const auto& row : read_csv(dir / "out" / "intensity.csv")) {
    const auto start = std::chrono::sys_days{*parse_date(row[0])};
    const auto end = start + std::chrono::days{9};
    const double p = std::stod(row[2]);
    if (start >= std::chrono::sys_days{first_vac} && end <= std::chrono::sys_days{last_vac}) inside.push_back(p);
    if (end < std::chrono::sys_days{first_vac} || start > std::chrono::sys_days{last_vac}) normal.push_back(p);
  }
  REQUIRE(inside.size() == 6);
  REQUIRE(!normal.empty());
  std::sort(inside.begin(), inside.end());
  std::sort(normal.begin(), normal.end());
  CHECK(inside[inside.size() / 2] <= 0.5 * normal[normal.size() / 2]);

  const auto notes = read_csv(dir / "out" / "annotations.csv");
  REQUIRE(notes.size() == 1);
  CHECK(notes[0][0] == "2018-01-21");
  CHECK(notes[0][1] == "2018-02-04");
}

TEST_CASE("track output is identical across thread counts") {
  const auto dir = scratch("track_threads");
  const auto input = write_readings(dir, testing::ymd(2018, 2, 5), 40, daily_usage);
  REQUIRE(run("track --threads 1 --input " + q(input) + " --out " + q(dir / "a")).exit_code == 0);
  REQUIRE(run("track --threads 8 --input " + q(input) + " --out " + q(dir / "b")).exit_code == 0);
  for (const char* f : {"intensity.csv", "overlay.csv", "annotations.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
}
