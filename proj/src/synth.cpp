#include "meterrhythm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "meterrhythm/error.hpp"

namespace meterrhythm {

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); }

Date date_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) invalid(std::string("missing date field '") + key + "'");
  auto d = parse_date(j[key].get<std::string>());
  if (!d) invalid(std::string("bad date in '") + key + "'");
  return *d;
}

DayTemplate template_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != kBinsPerDay)
    invalid(std::string("'") + key + "' must be an array of 96 numbers");
  DayTemplate t{};
  for (std::size_t k = 0; k < kBinsPerDay; ++k) {
    if (!j[key][k].is_number()) invalid(std::string("'") + key + "' must be numeric");
    t[k] = j[key][k].get<double>();
  }
  return t;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    invalid(path + ": " + e.what());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (std::chrono::sys_days{span.last} < std::chrono::sys_days{span.first}) invalid("span is empty");
  for (const auto* t : {&weekday_template, &saturday_template, &sunday_template})
    for (double v : *t)
      if (!(v >= 0.0) || !std::isfinite(v)) invalid("template values must be finite and >= 0");
  if (!(noise_sd >= 0.0) || !(vacation_noise_sd >= 0.0)) invalid("noise_sd must be >= 0");
  if (!(vacation_litres >= 0.0)) invalid("vacation_litres must be >= 0");
  if (jitter_min_seconds < 0 || jitter_max_seconds < jitter_min_seconds)
    invalid("jitter range must satisfy 0 <= min <= max");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) invalid("dropout_rate must be in [0, 1)");
  if (!(initial_litres >= 0.0)) invalid("initial_litres must be >= 0");
  if (daily_pattern && (!(daily_pattern->period_hours > 0) || !(daily_pattern->amplitude >= 0)))
    invalid("daily_pattern needs period_hours > 0 and amplitude >= 0");
  for (const auto& v : vacations)
    if (std::chrono::sys_days{v.last} < std::chrono::sys_days{v.first}) invalid("vacation range is empty");
  TimeZone::parse(time_zone);
}

TemplateSet load_templates(const std::string& path) {
  const auto j = read_json(path);
  TemplateSet t;
  t.version = j.value("version", std::string{});
  t.weekday = template_field(j, "weekday");
  t.saturday = template_field(j, "saturday");
  t.sunday = template_field(j, "sunday");
  return t;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) invalid("scenario must be a JSON object");
  ScenarioConfig c;
  try {
    c.span = {date_field(j, "start"), date_field(j, "end")};
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("templates")) {
      const auto t = load_templates((std::filesystem::path(base_dir) / j["templates"].get<std::string>()).string());
      c.weekday_template = t.weekday;
      c.saturday_template = t.saturday;
      c.sunday_template = t.sunday;
    }
    if (j.contains("weekday_template")) c.weekday_template = template_field(j, "weekday_template");
    if (j.contains("saturday_template")) c.saturday_template = template_field(j, "saturday_template");
    if (j.contains("sunday_template")) c.sunday_template = template_field(j, "sunday_template");
    c.noise_sd = j.value("noise_sd", 0.0);
    if (j.contains("jitter_seconds")) {
      const auto& js = j["jitter_seconds"];
      if (!js.is_array() || js.size() != 2) invalid("jitter_seconds must be [min, max]");
      c.jitter_min_seconds = js[0].get<int>();
      c.jitter_max_seconds = js[1].get<int>();
    }
    c.dropout_rate = j.value("dropout_rate", 0.0);
    for (const auto& v : j.value("vacations", nlohmann::json::array())) {
      if (!v.is_array() || v.size() != 2) invalid("vacations must be [start, end] pairs");
      auto a = parse_date(v[0].get<std::string>()), b = parse_date(v[1].get<std::string>());
      if (!a || !b) invalid("bad vacation date");
      c.vacations.push_back({*a, *b});
    }
    c.vacation_litres = j.value("vacation_litres", c.vacation_litres);
    c.vacation_noise_sd = j.value("vacation_noise_sd", c.vacation_noise_sd);
    if (j.contains("daily_pattern") && !j["daily_pattern"].is_null()) {
      const auto& p = j["daily_pattern"];
      c.daily_pattern = PureTone{p.value("period_hours", 24.0), p.value("amplitude", 1.0)};
    }
    c.initial_litres = j.value("initial_litres", 0.0);
    c.time_zone = j.value("time_zone", c.time_zone);
    c.source_id = j.value("source_id", c.source_id);
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("scenario: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  return from_json(read_json(path), std::filesystem::path(path).parent_path().string());
}

namespace {

bool on_vacation(const ScenarioConfig& cfg, Date d) {
  return std::any_of(cfg.vacations.begin(), cfg.vacations.end(), [&](const DateRange& r) { return r.contains(d); });
}

}  // namespace

double template_value(const ScenarioConfig& cfg, Date date, int slot) {
  if (on_vacation(cfg, date)) return cfg.vacation_litres;
  if (cfg.daily_pattern) {
    const double day_offset = (std::chrono::sys_days{date} - std::chrono::sys_days{cfg.span.first}).count();
    const double t = 24.0 * day_offset + 0.25 * slot + 0.125;
    return cfg.daily_pattern->amplitude *
           (1.0 + std::cos(2.0 * std::numbers::pi * t / cfg.daily_pattern->period_hours));
  }
  const auto wd = weekday_of(date);
  const auto& tpl = wd == std::chrono::Saturday ? cfg.saturday_template
                    : wd == std::chrono::Sunday ? cfg.sunday_template
                                                : cfg.weekday_template;
  return tpl[static_cast<std::size_t>(slot)];
}

ReadingStream generate(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto tz = TimeZone::parse(cfg.time_zone);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> jitter(cfg.jitter_min_seconds, cfg.jitter_max_seconds);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // The counter holds initial_litres at the first local midnight; that state
  // is not observed. Each emitted reading closes one 15-minute interval.
  const Instant end = tz.to_utc(local_midnight(Date{std::chrono::sys_days{cfg.span.last} + std::chrono::days{1}}));
  Instant t = tz.to_utc(local_midnight(cfg.span.first));
  double cumulative = cfg.initial_litres;

  ReadingStream out;
  out.source_id = cfg.source_id;
  for (;;) {
    // Fixed draw order per step keeps runs reproducible.
    const Instant next = t + kBinWidth + std::chrono::seconds{jitter(rng)};
    const double z = gauss(rng);
    const bool dropped = unit(rng) < cfg.dropout_rate;
    if (next > end) break;
    const auto pos = local_slot(next, tz);
    const double sd = on_vacation(cfg, pos.date) ? cfg.vacation_noise_sd : cfg.noise_sd;
    cumulative += std::max(0.0, template_value(cfg, pos.date, pos.slot) + sd * z);
    if (!dropped) out.readings.push_back({next, cumulative});
    t = next;
  }
  return out;
}

}  // namespace meterrhythm
