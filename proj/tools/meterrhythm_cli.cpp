// meterrhythm: water-meter periodicity pipeline.
//
//   meterrhythm simulate    --scenario s.json --out dir
//   meterrhythm ingest      --input readings.csv --out dir
//   meterrhythm profile     --input readings.csv --calendar cal.txt --out dir
//   meterrhythm periodogram --input readings.csv --calendar cal.txt --out dir
//   meterrhythm track       --input readings.csv --calendar cal.txt --out dir
//
// Exit codes: 0 success, 2 usage/config error, 3 data error.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "meterrhythm/binning.hpp"
#include "meterrhythm/domain.hpp"
#include "meterrhythm/error.hpp"
#include "meterrhythm/ingest.hpp"
#include "meterrhythm/pipeline.hpp"
#include "meterrhythm/spectral_io.hpp"
#include "meterrhythm/synth.hpp"
#include "meterrhythm/tracking.hpp"

namespace fs = std::filesystem;
using namespace meterrhythm;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct Options {
  std::string scenario;
  std::string input;
  std::string calendar;
  std::string out;
  std::string tz = "UTC";
  std::string format;
  std::optional<std::uint64_t> seed;
  int window_days = 10;
  int stride_days = 1;
  int min_valid_days = 8;
  int min_valid_slots = kDefaultMinValidSlots;
  std::vector<double> periods{12.0, 24.0};
  std::string estimator = "ls";
  std::string normalization = "raw";
  std::string std_estimator = "population";
  std::vector<std::string> analysed_labels;
  std::string window_start;
  int gap_minutes = 45;
  int oversample = 4;
  unsigned threads = 1;
  bool drop_skipped = false;
  bool per_day = false;
  bool json_errors = false;
};

/// Collects the outputs of one command and writes the run manifest.
class Run {
 public:
  Run(std::string command, const Options& o) : command_(std::move(command)), out_(o.out) {
    fs::create_directories(out_);
  }

  json& config() { return config_; }

  void input(const std::string& path) {
    inputs_.push_back({{"path", path}, {"sha256", sha256_file(path)}});
  }

  template <typename Writer>
  void write(const std::string& name, Writer&& writer) {
    std::ostringstream buf;
    writer(buf);
    const std::string content = buf.str();
    std::ofstream f(out_ / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + (out_ / name).string());
    f << content;
    outputs_.push_back({{"path", name}, {"sha256", sha256_hex(content)}});
  }

  void finish() {
    json manifest{
        {"command", command_},
        {"tool_version", METERRHYTHM_VERSION},
        {"generated_at", timestamp()},
        {"config", config_},
        {"config_digest", sha256_hex(config_.dump())},
        {"inputs", inputs_},
        {"outputs", outputs_},
    };
    std::ofstream(out_ / "manifest.json") << manifest.dump(2) << '\n';
  }

 private:
  static std::string timestamp() {
    // SOURCE_DATE_EPOCH pins the manifest time for reproducible builds.
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
      return format_instant(Instant{std::chrono::seconds{std::atoll(epoch)}});
    return format_instant(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
  }

  std::string command_;
  fs::path out_;
  json config_ = json::object();
  json inputs_ = json::array();
  json outputs_ = json::array();
};

Estimator parse_estimator(const std::string& s) {
  if (s == "classic") return Estimator::Classic;
  if (s == "ls") return Estimator::LombScargle;
  throw Error(ErrorCode::InvalidConfig, "unknown estimator '" + s + "'");
}

Normalization parse_normalization(const std::string& s) {
  if (s == "raw") return Normalization::Raw;
  if (s == "variance") return Normalization::Variance;
  throw Error(ErrorCode::InvalidConfig, "unknown normalization '" + s + "'");
}

DayClass parse_day_label(const std::string& s) {
  if (s == "vacation") return DayClass::Vacation;
  if (s == "holiday") return DayClass::PublicHoliday;
  if (s == "weather") return DayClass::WeatherEvent;
  if (s == "hardware") return DayClass::HardwareFault;
  throw Error(ErrorCode::InvalidConfig, "unknown day label '" + s + "'");
}

WindowConfig window_config(const Options& o) {
  WindowConfig cfg;
  cfg.window_days = o.window_days;
  cfg.stride_days = o.stride_days;
  cfg.min_valid_days = o.min_valid_days;
  cfg.target_periods = o.periods;
  cfg.min_valid_slots = o.min_valid_slots;
  cfg.keep_skipped = !o.drop_skipped;
  cfg.estimator = parse_estimator(o.estimator);
  cfg.normalization = parse_normalization(o.normalization);
  cfg.oversample = o.oversample;
  for (const auto& l : o.analysed_labels) cfg.analysed_labels.push_back(parse_day_label(l));
  cfg.validate();
  return cfg;
}

json window_config_json(const WindowConfig& c) {
  json labels = json::array();
  for (auto l : c.analysed_labels) labels.push_back(calendar_label(l));
  return {{"window_days", c.window_days},     {"stride_days", c.stride_days},
          {"min_valid_days", c.min_valid_days}, {"target_periods", c.target_periods},
          {"min_valid_slots", c.min_valid_slots}, {"keep_skipped", c.keep_skipped},
          {"analysed_labels", labels},          {"estimator", to_string(c.estimator)},
          {"normalization", to_string(c.normalization)}, {"oversample", c.oversample},
          {"min_period_hours", c.min_period_hours}, {"max_period_hours", c.max_period_hours}};
}

ExclusionCalendar load_calendar(const Options& o, Run& run) {
  if (o.calendar.empty()) return {};
  run.input(o.calendar);
  return ExclusionCalendar::load(o.calendar);
}

SegmentOptions segment_options(const Options& o) {
  if (o.gap_minutes < 15) throw Error(ErrorCode::InvalidConfig, "--gap-minutes must be >= 15");
  SegmentOptions s;
  s.gap_threshold = std::chrono::minutes{o.gap_minutes};
  return s;
}

CleanedData load_days(const Options& o, Run& run) {
  run.input(o.input);
  const auto stream = load_stream(o.input);
  return bin_stream(stream, TimeZone::parse(o.tz), segment_options(o));
}

void warn(const UsageSegments& usage) {
  for (const auto& w : usage.warnings) std::cerr << "warning: " << w.message << '\n';
}

int cmd_simulate(const Options& o) {
  if (!fs::exists(o.scenario))
    throw Error(ErrorCode::InvalidConfig, "scenario file not found: " + o.scenario);
  auto cfg = ScenarioConfig::load(o.scenario);
  if (o.seed) cfg.seed = *o.seed;
  const auto format = o.format == "jsonl" ? StreamFormat::Jsonl : StreamFormat::Csv;
  if (!o.format.empty() && o.format != "csv" && o.format != "jsonl")
    throw Error(ErrorCode::InvalidConfig, "--format must be csv or jsonl");

  Run run("simulate", o);
  run.input(o.scenario);
  run.config() = {{"seed", cfg.seed}, {"format", format == StreamFormat::Csv ? "csv" : "jsonl"}};
  const auto stream = generate(cfg);
  run.write(format == StreamFormat::Csv ? "readings.csv" : "readings.jsonl",
            [&](std::ostream& os) { write_stream(os, stream, format); });
  run.finish();
  std::cout << "wrote " << stream.readings.size() << " readings to " << o.out << '\n';
  return 0;
}

int cmd_ingest(const Options& o) {
  Run run("ingest", o);
  run.config() = {{"tz", o.tz}, {"gap_minutes", o.gap_minutes}};
  const auto data = load_days(o, run);
  warn(data.usage);
  const auto intervals = data.usage.flatten();
  run.write("intervals.csv", [&](std::ostream& os) {
    os << "start,end,litres\n";
    for (const auto& iv : intervals)
      os << format_instant(iv.start) << ',' << format_instant(iv.end) << ',' << fmt::format("{}", iv.litres) << '\n';
  });
  run.write("binned.csv", [&](std::ostream& os) { write_binned_csv(os, data.days); });
  run.write("ingest_report.json", [&](std::ostream& os) {
    json warnings = json::array();
    for (const auto& w : data.usage.warnings) warnings.push_back(w.message);
    json per_day = json::array();
    for (const auto& d : data.days) per_day.push_back({{"date", format_date(d.date)}, {"valid_bins", d.valid_count()}});
    os << json{{"segments", data.usage.segments.size()},
               {"intervals", intervals.size()},
               {"late_intervals", data.usage.late_intervals},
               {"warnings", warnings},
               {"days", per_day}}
              .dump(2)
       << '\n';
  });
  run.finish();
  return 0;
}

int cmd_profile(const Options& o) {
  Run run("profile", o);
  const auto calendar = load_calendar(o, run);
  const auto data = load_days(o, run);
  warn(data.usage);
  const auto estimator = o.std_estimator == "sample" ? StdEstimator::Sample : StdEstimator::Population;
  if (o.std_estimator != "sample" && o.std_estimator != "population")
    throw Error(ErrorCode::InvalidConfig, "--std must be population or sample");
  run.config() = {{"tz", o.tz}, {"std", o.std_estimator}, {"min_valid_slots", o.min_valid_slots},
                  {"gap_minutes", o.gap_minutes}, {"per_day", o.per_day}};

  const auto days = retained_days(data.days, calendar, o.min_valid_slots);
  if (days.empty()) throw Error(ErrorCode::NoMatchingDays, "no days remain after exclusion");
  int written = 0;
  for (auto g : {DayGroup::Weekday, DayGroup::Saturday, DayGroup::Sunday}) {
    const std::string name(to_string(g));
    try {
      const auto p = profile(days, selector_for(g), estimator, name);
      run.write("profile_" + name + ".csv", [&](std::ostream& os) { write_profile_csv(os, p); });
      ++written;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoMatchingDays) throw;
      std::cerr << "warning: no " << name << " days; profile not written\n";
    }
  }
  if (o.per_day) {
    for (unsigned wd = 0; wd < 7; ++wd) {
      std::string name(weekday_name(std::chrono::weekday{wd}));
      for (auto& ch : name) ch = static_cast<char>(std::tolower(ch));
      try {
        const auto p = profile(days, WeekdaySet::single(std::chrono::weekday{wd}), estimator, name);
        run.write("profile_" + name + ".csv", [&](std::ostream& os) { write_profile_csv(os, p); });
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoMatchingDays) throw;
      }
    }
  }
  run.finish();
  if (written == 0) throw Error(ErrorCode::NoMatchingDays, "no profile group has data");
  return 0;
}

int cmd_periodogram(const Options& o) {
  const auto cfg = window_config(o);
  Run run("periodogram", o);
  const auto calendar = load_calendar(o, run);
  const auto data = load_days(o, run);
  warn(data.usage);
  run.config() = window_config_json(cfg);
  run.config()["tz"] = o.tz;
  run.config()["window_start"] = o.window_start;

  const auto windows = make_windows(data.days, calendar, cfg);
  const AnalysisWindow* chosen = nullptr;
  if (!o.window_start.empty()) {
    const auto start = parse_date(o.window_start);
    if (!start) throw Error(ErrorCode::InvalidConfig, "bad --window-start date");
    for (const auto& w : windows)
      if (w.start == *start) chosen = &w;
    if (!chosen) throw Error(ErrorCode::NoMatchingDays, "no window starts on " + o.window_start);
    if (chosen->skipped) throw Error(ErrorCode::NoMatchingDays, "window skipped: " + chosen->skip_reason);
  } else {
    for (const auto& w : windows)
      if (!w.skipped) {
        chosen = &w;
        break;
      }
    if (!chosen) throw Error(ErrorCode::NoMatchingDays, "no window has enough valid days");
  }
  const auto grid = FrequencyGrid<double>::for_window(24.0 * cfg.window_days, cfg.grid_options());
  auto pg = estimate(cfg.estimator, window_samples(*chosen), grid, cfg.normalization);
  pg.window_id = format_date(chosen->start);
  run.write("periodogram.csv", [&](std::ostream& os) { write_periodogram_csv(os, pg); });
  run.write("periodogram.json", [&](std::ostream& os) {
    auto meta = periodogram_metadata(pg, chosen->start, chosen->last());
    meta["valid_days"] = chosen->valid_day_count;
    os << meta.dump(2) << '\n';
  });
  run.finish();
  return 0;
}

int cmd_track(const Options& o) {
  const auto cfg = window_config(o);
  Run run("track", o);
  const auto calendar = load_calendar(o, run);
  const auto data = load_days(o, run);
  warn(data.usage);
  run.config() = window_config_json(cfg);
  run.config()["tz"] = o.tz;

  const auto windows = make_windows(data.days, calendar, cfg);
  if (windows.empty()) throw Error(ErrorCode::NoMatchingDays, "input spans fewer days than one window");
  auto results = analyse_windows(windows, cfg, o.threads);
  IntensitySeries series{{}, cfg};
  std::vector<Periodogram<double>> periodograms;
  for (auto& r : results) {
    series.points.push_back(r.point);
    if (r.periodogram) periodograms.push_back(std::move(*r.periodogram));
  }
  run.write("intensity.csv", [&](std::ostream& os) { write_intensity_csv(os, series); });
  const auto rows = overlay_export(periodograms);
  run.write("overlay.csv", [&](std::ostream& os) { write_overlay_csv(os, rows); });
  run.write("annotations.csv", [&](std::ostream& os) {
    os << "first,last,label\n";
    for (const auto& e : calendar.entries())
      if (e.label == DayClass::Vacation)
        os << format_date(e.range.first) << ',' << format_date(e.range.last) << ',' << calendar_label(e.label)
           << '\n';
  });
  run.finish();
  std::cout << series.points.size() << " windows written to " << o.out << '\n';
  return 0;
}

void add_window_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--window-days", o.window_days, "Window length in days")->capture_default_str();
  cmd->add_option("--stride-days", o.stride_days, "Days between window starts")->capture_default_str();
  cmd->add_option("--min-valid-days", o.min_valid_days, "Minimum valid days per window")->capture_default_str();
  cmd->add_option("--periods", o.periods, "Target periods in hours")->delimiter(',')->capture_default_str();
  cmd->add_option("--estimator", o.estimator, "classic|ls")->capture_default_str();
  cmd->add_option("--normalization", o.normalization, "raw|variance")->capture_default_str();
  cmd->add_option("--oversample", o.oversample, "Grid oversampling factor")->capture_default_str();
  cmd->add_option("--include-labels", o.analysed_labels,
                  "Calendar labels kept in the analysis (e.g. vacation)")
      ->delimiter(',');
  cmd->add_flag("--drop-skipped", o.drop_skipped, "Omit windows with too few valid days");
}

void add_data_flags(CLI::App* cmd, Options& o, bool calendar) {
  cmd->add_option("--input", o.input, "Readings file (.csv or .jsonl)")->required();
  if (calendar) cmd->add_option("--calendar", o.calendar, "Exclusion calendar file");
  cmd->add_option("--tz", o.tz, "Civil time zone: UTC, +HH:MM or POSIX TZ rule")->capture_default_str();
  cmd->add_option("--gap-minutes", o.gap_minutes, "Discard intervals longer than this")->capture_default_str();
  cmd->add_option("--min-valid-slots", o.min_valid_slots, "Minimum readings for a day to count")
      ->capture_default_str();
}

void report(const Options& o, const std::string& code, const std::string& message, int exit_code) {
  if (o.json_errors)
    std::cerr << json{{"error", code}, {"message", message}, {"exit_code", exit_code}}.dump() << '\n';
  else
    std::cerr << "error: " << message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Household water-meter periodicity analysis"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("--json-errors", o.json_errors, "Machine-readable errors on stderr");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic reading stream");
  simulate->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
  simulate->add_option("--seed", o.seed, "Override the scenario seed");
  simulate->add_option("--format", o.format, "csv|jsonl");

  auto* ingest = app.add_subcommand("ingest", "Difference and bin a reading stream");
  add_data_flags(ingest, o, false);

  auto* prof = app.add_subcommand("profile", "Weekday / Saturday / Sunday usage profiles");
  add_data_flags(prof, o, true);
  prof->add_option("--std", o.std_estimator, "population|sample")->capture_default_str();
  prof->add_flag("--per-day", o.per_day, "Also write one profile per weekday");

  auto* pgram = app.add_subcommand("periodogram", "Periodogram of one analysis window");
  add_data_flags(pgram, o, true);
  add_window_flags(pgram, o);
  pgram->add_option("--window-start", o.window_start, "Window start date (default: first usable)");

  auto* track = app.add_subcommand("track", "Periodicity intensity over sliding windows");
  add_data_flags(track, o, true);
  add_window_flags(track, o);
  track->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();

  for (auto* cmd : {simulate, ingest, prof, pgram, track}) {
    cmd->add_option("--out", o.out, "Output directory")->required();
    cmd->add_flag("--json-errors", o.json_errors, "Machine-readable errors on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report(o, "UsageError", e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*ingest) return cmd_ingest(o);
    if (*prof) return cmd_profile(o);
    if (*pgram) return cmd_periodogram(o);
    if (*track) return cmd_track(o);
  } catch (const Error& e) {
    const int code = is_config_error(e.code()) ? kExitUsage : kExitData;
    report(o, std::string(to_string(e.code())), e.what(), code);
    return code;
  } catch (const fs::filesystem_error& e) {
    report(o, "InvalidConfig", e.what(), kExitUsage);
    return kExitUsage;
  }
  return kExitUsage;
}
