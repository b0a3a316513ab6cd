#include "meterrhythm/tracking.hpp"

#include <algorithm>
#include <atomic>
#include <fmt/format.h>
#include <thread>

#include "meterrhythm/error.hpp"

namespace meterrhythm {

void WindowConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
  if (window_days < 2) bad("window_days must be at least 2");
  if (stride_days < 1 || stride_days > window_days) bad("stride_days must be in [1, window_days]");
  if (min_valid_days < 0 || min_valid_days > window_days)
    bad("min_valid_days must be in [0, window_days]");
  if (target_periods.empty()) bad("at least one target period is required");
  for (double p : target_periods)
    if (!(p > 0)) bad("target periods must be positive");
  if (min_valid_slots < 0 || min_valid_slots > kBinsPerDay) bad("min_valid_slots must be in [0, 96]");
  if (oversample < 1) bad("oversample must be at least 1");
}

GridOptions WindowConfig::grid_options() const {
  GridOptions g;
  g.min_period_hours = min_period_hours;
  g.max_period_hours = max_period_hours;
  g.oversample = oversample;
  g.target_periods = target_periods;
  return g;
}

bool WindowConfig::analysed(DayClass c) const {
  return c == DayClass::Normal ||
         std::find(analysed_labels.begin(), analysed_labels.end(), c) != analysed_labels.end();
}

std::vector<AnalysisWindow> make_windows(std::span<const BinnedDay> days,
                                         const ExclusionCalendar& calendar,
                                         const WindowConfig& cfg) {
  cfg.validate();
  if (days.empty()) throw Error(ErrorCode::EmptyInput, "no binned days to window");
  for (std::size_t i = 1; i < days.size(); ++i)
    if (std::chrono::sys_days{days[i].date} <= std::chrono::sys_days{days[i - 1].date})
      throw Error(ErrorCode::InvalidConfig, "binned days must be strictly date-ordered", i);

  const std::chrono::sys_days first{days.front().date}, last{days.back().date};
  const std::chrono::days width{cfg.window_days}, stride{cfg.stride_days};
  std::vector<AnalysisWindow> windows;
  auto day_it = days.begin();
  for (auto start = first; start + width - std::chrono::days{1} <= last; start += stride) {
    while (day_it != days.end() && std::chrono::sys_days{day_it->date} < start) ++day_it;
    AnalysisWindow w{Date{start}, cfg.window_days, {}, 0, false, {}};
    for (auto it = day_it; it != days.end() && std::chrono::sys_days{it->date} < start + width; ++it) {
      if (!cfg.analysed(calendar.classify(it->date))) continue;
      if (it->valid_count() < cfg.min_valid_slots) continue;
      w.days.push_back(*it);
    }
    w.valid_day_count = static_cast<int>(w.days.size());
    if (w.valid_day_count < cfg.min_valid_days) {
      if (!cfg.keep_skipped) continue;
      w.skipped = true;
      w.skip_reason = fmt::format("{} valid days < {}", w.valid_day_count, cfg.min_valid_days);
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

Samples<double> window_samples(const AnalysisWindow& w) {
  std::vector<double> t, v;
  t.reserve(w.days.size() * kBinsPerDay);
  v.reserve(w.days.size() * kBinsPerDay);
  const std::chrono::sys_days start{w.start};
  for (const auto& day : w.days) {
    const double offset_hours = 24.0 * (std::chrono::sys_days{day.date} - start).count();
    for (int k = 0; k < kBinsPerDay; ++k) {
      if (!day.bins[k]) continue;
      t.push_back(offset_hours + 0.25 * k + 0.125);
      v.push_back(*day.bins[k]);
    }
  }
  const auto n = static_cast<Eigen::Index>(t.size());
  return {Eigen::Map<const Vector<double>>(t.data(), n), Eigen::Map<const Vector<double>>(v.data(), n)};
}

namespace {

WindowResult analyse_one(const AnalysisWindow& w, const FrequencyGrid<double>& grid,
                         const WindowConfig& cfg) {
  WindowResult r;
  r.point.window_start = w.start;
  r.point.valid_days = w.valid_day_count;
  r.point.power.assign(cfg.target_periods.size(), std::nullopt);
  if (w.skipped) {
    r.point.skipped = true;
    r.point.skip_reason = w.skip_reason;
    return r;
  }
  try {
    auto pg = estimate(cfg.estimator, window_samples(w), grid, cfg.normalization);
    pg.window_id = format_date(w.start);
    for (std::size_t i = 0; i < cfg.target_periods.size(); ++i)
      r.point.power[i] = intensity_at(pg, cfg.target_periods[i]);
    r.periodogram = std::move(pg);
  } catch (const Error& e) {
    r.point.skipped = true;
    r.point.skip_reason = std::string(to_string(e.code()));
    r.point.power.assign(cfg.target_periods.size(), std::nullopt);
  }
  return r;
}

}  // namespace

std::vector<WindowResult> analyse_windows(std::span<const AnalysisWindow> windows,
                                          const WindowConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto grid = FrequencyGrid<double>::for_window(24.0 * cfg.window_days, cfg.grid_options());
  std::vector<WindowResult> results(windows.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(windows.size(), 1)));

  // Each worker writes only its own slots, so the output is order-independent.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < windows.size(); i = next++) results[i] = analyse_one(windows[i], grid, cfg);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

IntensitySeries track_intensity(std::span<const AnalysisWindow> windows, const WindowConfig& cfg,
                                unsigned threads) {
  if (windows.empty()) throw Error(ErrorCode::EmptyInput, "no windows to track");
  IntensitySeries series{{}, cfg};
  for (auto& r : analyse_windows(windows, cfg, threads)) series.points.push_back(std::move(r.point));
  return series;
}

std::vector<OverlayRow> overlay_export(std::span<const Periodogram<double>> periodograms) {
  std::vector<OverlayRow> rows;
  for (const auto& pg : periodograms)
    for (Eigen::Index i = 0; i < pg.grid.size(); ++i) rows.push_back({pg.window_id, pg.grid[i], pg.power[i]});
  return rows;
}

void write_overlay_csv(std::ostream& out, std::span<const OverlayRow> rows) {
  out << "window_id,frequency_cph,period_hours,power\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{}\n", r.window_id, r.frequency_cph, 1.0 / r.frequency_cph, r.power);
}

void write_intensity_csv(std::ostream& out, const IntensitySeries& series) {
  out << "window_start,period_hours,power,valid_days,skipped\n";
  for (const auto& p : series.points) {
    const auto start = format_date(p.window_start);
    for (std::size_t i = 0; i < series.config.target_periods.size(); ++i) {
      const auto& v = p.power[i];
      out << start << ',' << fmt::format("{}", series.config.target_periods[i]) << ','
          << (v ? fmt::format("{}", *v) : std::string("n/a")) << ',' << p.valid_days << ','
          << (p.skipped ? 1 : 0) << '\n';
    }
  }
}

}  // namespace meterrhythm
