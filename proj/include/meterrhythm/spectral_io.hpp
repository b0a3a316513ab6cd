#pragma once

#include <nlohmann/json.hpp>
#include <ostream>

#include "meterrhythm/civil_time.hpp"
#include "meterrhythm/spectral.hpp"

namespace meterrhythm {

/// `frequency_cph,period_hours,power`, one row per grid point.
void write_periodogram_csv(std::ostream& out, const Periodogram<double>& pg);

/// Sidecar describing how a periodogram was produced.
nlohmann::json periodogram_metadata(const Periodogram<double>& pg, Date window_first,
                                    Date window_last);

}  // namespace meterrhythm
