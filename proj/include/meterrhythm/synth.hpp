#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "meterrhythm/binning.hpp"
#include "meterrhythm/domain.hpp"
#include "meterrhythm/ingest.hpp"

namespace meterrhythm {

using DayTemplate = std::array<double, kBinsPerDay>;

/// Replaces the day templates with a(1 + cos(2 pi t / period)).
struct PureTone {
  double period_hours = 24.0;
  double amplitude = 1.0;
};

struct ScenarioConfig {
  DateRange span;
  std::uint64_t seed = 0;
  DayTemplate weekday_template{};
  DayTemplate saturday_template{};
  DayTemplate sunday_template{};
  double noise_sd = 0.0;
  int jitter_min_seconds = 1;
  int jitter_max_seconds = 30;
  double dropout_rate = 0.0;
  std::vector<DateRange> vacations;
  double vacation_litres = 0.05;
  double vacation_noise_sd = 0.05;
  std::optional<PureTone> daily_pattern;
  double initial_litres = 0.0;
  std::string time_zone = "UTC";
  std::string source_id = "synthetic";

  /// Throws InvalidConfig.
  void validate() const;

  /// Scenario JSON. Templates are inline arrays or, via `"templates": path`,
  /// a template file resolved relative to `base_dir`.
  static ScenarioConfig from_json(const nlohmann::json& j, const std::string& base_dir = ".");
  static ScenarioConfig load(const std::string& path);
};

struct TemplateSet {
  std::string version;
  DayTemplate weekday{};
  DayTemplate saturday{};
  DayTemplate sunday{};
};

TemplateSet load_templates(const std::string& path);

/// Expected usage for one slot of one day, before noise.
double template_value(const ScenarioConfig& cfg, Date date, int slot);

/// Cumulative readings at a 15-minute nominal cadence. Each reading lands
/// 15 min + jitter after the previous one; dropped readings are not emitted
/// but their volume accrues into the next surviving reading. Identical
/// configs yield identical streams.
ReadingStream generate(const ScenarioConfig& cfg);

}  // namespace meterrhythm
