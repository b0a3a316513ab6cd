#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "meterrhythm/binning.hpp"
#include "meterrhythm/domain.hpp"
#include "meterrhythm/spectral.hpp"

namespace meterrhythm {

struct WindowConfig {
  int window_days = 10;
  int stride_days = 1;
  int min_valid_days = 8;
  std::vector<double> target_periods{12.0, 24.0};

  /// A day counts as valid only with at least this many non-missing slots.
  int min_valid_slots = kDefaultMinValidSlots;
  /// Keep windows below min_valid_days as skip markers instead of dropping them.
  bool keep_skipped = true;
  /// Calendar labels whose days stay in the analysis (annotation only).
  std::vector<DayClass> analysed_labels;

  Estimator estimator = Estimator::LombScargle;
  Normalization normalization = Normalization::Raw;
  int oversample = 4;
  double min_period_hours = 4.0;
  double max_period_hours = 120.0;

  /// Throws InvalidConfig when the invariants do not hold.
  void validate() const;
  GridOptions grid_options() const;
  bool analysed(DayClass c) const;
};

struct AnalysisWindow {
  Date start;
  int window_days = 0;
  std::vector<BinnedDay> days;  // valid days only, date-ordered
  int valid_day_count = 0;
  bool skipped = false;
  std::string skip_reason;

  Date last() const { return Date{std::chrono::sys_days{start} + std::chrono::days{window_days - 1}}; }
};

/// Windows advance by stride_days over calendar time, from the first to the
/// last available date. Abnormal, absent and sparse days become gaps.
std::vector<AnalysisWindow> make_windows(std::span<const BinnedDay> days,
                                         const ExclusionCalendar& calendar,
                                         const WindowConfig& cfg);

/// Non-missing bins of the window; t = hours since window start at slot midpoints.
Samples<double> window_samples(const AnalysisWindow& w);

struct IntensityPoint {
  Date window_start;
  int valid_days = 0;
  bool skipped = false;
  std::string skip_reason;
  std::vector<std::optional<double>> power;  // parallel to config.target_periods
};

struct IntensitySeries {
  std::vector<IntensityPoint> points;
  WindowConfig config;
};

struct WindowResult {
  IntensityPoint point;
  std::optional<Periodogram<double>> periodogram;
};

/// Periodogram and target intensities for every window. Estimator failures
/// become skip markers. `threads` = 0 picks the hardware concurrency; results
/// do not depend on it.
std::vector<WindowResult> analyse_windows(std::span<const AnalysisWindow> windows,
                                          const WindowConfig& cfg, unsigned threads = 1);

IntensitySeries track_intensity(std::span<const AnalysisWindow> windows, const WindowConfig& cfg,
                                unsigned threads = 1);

struct OverlayRow {
  std::string window_id;
  double frequency_cph;
  double power;
};

/// Long-format table of every periodogram, for overlaid plots.
std::vector<OverlayRow> overlay_export(std::span<const Periodogram<double>> periodograms);

void write_overlay_csv(std::ostream& out, std::span<const OverlayRow> rows);

/// `window_start,period_hours,power,valid_days,skipped`; skipped powers are `n/a`.
void write_intensity_csv(std::ostream& out, const IntensitySeries& series);

}  // namespace meterrhythm
