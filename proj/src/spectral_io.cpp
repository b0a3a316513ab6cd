#include "meterrhythm/spectral_io.hpp"

#include <fmt/format.h>

namespace meterrhythm {

void write_periodogram_csv(std::ostream& out, const Periodogram<double>& pg) {
  out << "frequency_cph,period_hours,power\n";
  for (Eigen::Index i = 0; i < pg.grid.size(); ++i) {
    const double f = pg.grid[i];
    out << fmt::format("{},{},{}\n", f, 1.0 / f, pg.power[i]);
  }
}

nlohmann::json periodogram_metadata(const Periodogram<double>& pg, Date window_first,
                                    Date window_last) {
  return {
      {"estimator", to_string(pg.estimator)},
      {"normalization", to_string(pg.normalization)},
      {"window_id", pg.window_id},
      {"window_first", format_date(window_first)},
      {"window_last", format_date(window_last)},
      {"sample_count", pg.sample_count},
      {"grid_points", pg.grid.size()},
      {"frequency_min_cph", pg.grid[0]},
      {"frequency_max_cph", pg.grid[pg.grid.size() - 1]},
  };
}

}  // namespace meterrhythm
