#pragma once

// Power spectral density estimators for windowed usage series.
//
// Times are hours since the window start and frequencies are in cycles per
// hour. Two estimators are provided:
//   * classic_periodogram: P(f) = |sum_t x_t exp(-2 pi i f t)|^2 / n on
//     mean-subtracted, evenly spaced samples;
//   * lomb_scargle: generalised (floating-mean) Lomb-Scargle, fitting
//     c + a cos(2 pi f t) + b sin(2 pi f t) by weighted least squares.
// Raw Lomb-Scargle power is n/2 times the normalised reduction in weighted
// chi-square, which coincides with the classic periodogram at the Fourier
// frequencies k/T of a complete, evenly sampled window.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meterrhythm/error.hpp"

namespace meterrhythm {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Estimator { Classic, LombScargle };
enum class Normalization { Raw, Variance };

inline std::string_view to_string(Estimator e) {
  return e == Estimator::Classic ? "classic" : "ls";
}
inline std::string_view to_string(Normalization n) {
  return n == Normalization::Raw ? "raw" : "variance";
}

/// Gap-free list of (time, value) pairs; missing bins are simply absent.
template <typename Scalar>
struct Samples {
  Vector<Scalar> times;   // hours, strictly increasing
  Vector<Scalar> values;  // litres

  Samples() = default;
  Samples(Vector<Scalar> t, Vector<Scalar> v) : times(std::move(t)), values(std::move(v)) {
    if (times.size() != values.size())
      throw Error(ErrorCode::InvalidConfig, "times and values differ in length");
    for (Eigen::Index i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw Error(ErrorCode::InvalidConfig, "sample times must be strictly increasing",
                    static_cast<std::size_t>(i));
  }

  Eigen::Index size() const { return times.size(); }
};

struct GridOptions {
  double min_period_hours = 4.0;
  double max_period_hours = 120.0;
  /// Grid spacing is 1 / (window_hours * oversample).
  int oversample = 4;
  /// Periods whose frequencies must be grid points.
  std::vector<double> target_periods{12.0, 24.0};
  /// 15-minute sampling.
  double nyquist_cph = 2.0;
};

template <typename Scalar>
class FrequencyGrid {
 public:
  FrequencyGrid() = default;

  /// Throws InvalidGrid unless frequencies are positive, strictly increasing
  /// and not above `nyquist_cph`.
  static FrequencyGrid from_frequencies(Vector<Scalar> f, Scalar nyquist_cph = Scalar(2)) {
    if (f.size() == 0) throw Error(ErrorCode::InvalidGrid, "empty frequency grid");
    if (!(f[0] > Scalar(0))) throw Error(ErrorCode::InvalidGrid, "grid frequencies must be positive");
    for (Eigen::Index i = 1; i < f.size(); ++i)
      if (!(f[i] > f[i - 1]))
        throw Error(ErrorCode::InvalidGrid, "grid frequencies must be strictly increasing",
                    static_cast<std::size_t>(i));
    if (f[f.size() - 1] > nyquist_cph)
      throw Error(ErrorCode::InvalidGrid, "grid exceeds the Nyquist frequency");
    FrequencyGrid g;
    g.freq_ = std::move(f);
    return g;
  }

  /// Lattice k / (window_hours * oversample) between the period limits, with
  /// every target frequency inserted exactly.
  static FrequencyGrid for_window(Scalar window_hours, const GridOptions& opts = {}) {
    if (!(window_hours > Scalar(0)) || opts.oversample < 1 || !(opts.min_period_hours > 0) ||
        !(opts.max_period_hours > opts.min_period_hours))
      throw Error(ErrorCode::InvalidGrid, "invalid grid options");
    const Scalar span = window_hours * Scalar(opts.oversample);
    const Scalar f_lo = Scalar(1) / Scalar(opts.max_period_hours);
    const Scalar f_hi = Scalar(1) / Scalar(opts.min_period_hours);
    const auto k_lo = static_cast<long long>(std::ceil(f_lo * span - Scalar(1e-9)));
    const auto k_hi = static_cast<long long>(std::floor(f_hi * span + Scalar(1e-9)));
    std::vector<Scalar> f;
    for (long long k = std::max(k_lo, 1LL); k <= k_hi; ++k) f.push_back(Scalar(k) / span);
    for (double p : opts.target_periods) {
      if (!(p > 0)) throw Error(ErrorCode::InvalidGrid, "target periods must be positive");
      const Scalar ft = Scalar(1) / Scalar(p);
      const bool present = std::any_of(f.begin(), f.end(), [&](Scalar x) { return same_frequency(x, ft); });
      if (!present) f.push_back(ft);
    }
    std::sort(f.begin(), f.end());
    return from_frequencies(Eigen::Map<const Vector<Scalar>>(f.data(), static_cast<Eigen::Index>(f.size())),
                            Scalar(opts.nyquist_cph));
  }

  const Vector<Scalar>& frequencies() const { return freq_; }
  Eigen::Index size() const { return freq_.size(); }
  Scalar operator[](Eigen::Index i) const { return freq_[i]; }

  /// Index of the grid point equal to `f` (up to representation error).
  std::optional<Eigen::Index> find(Scalar f) const {
    auto it = std::lower_bound(freq_.data(), freq_.data() + freq_.size(), f * (Scalar(1) - kTol));
    if (it != freq_.data() + freq_.size() && same_frequency(*it, f)) return it - freq_.data();
    return std::nullopt;
  }

  static bool same_frequency(Scalar a, Scalar b) {
    using std::abs;
    return abs(a - b) <= kTol * abs(b);
  }

 private:
  static constexpr Scalar kTol = Scalar(1e-12);
  Vector<Scalar> freq_;
};

template <typename Scalar>
struct Periodogram {
  FrequencyGrid<Scalar> grid;
  Vector<Scalar> power;
  Estimator estimator = Estimator::LombScargle;
  Normalization normalization = Normalization::Raw;
  std::string window_id;
  Eigen::Index sample_count = 0;
};

namespace detail {

template <typename Scalar>
Scalar clamp_power(Scalar p) {
  return std::isfinite(p) && p > Scalar(0) ? p : Scalar(0);
}

}  // namespace detail

/// Classic (Schuster) periodogram on mean-removed values. Requires a uniform
/// time step; gapped windows must use lomb_scargle.
template <typename Scalar>
Periodogram<Scalar> classic_periodogram(const Samples<Scalar>& s, const FrequencyGrid<Scalar>& grid,
                                        Normalization norm = Normalization::Raw) {
  using std::abs;
  const Eigen::Index n = s.size();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "classic periodogram needs at least 2 samples");
  const Scalar step = s.times[1] - s.times[0];
  for (Eigen::Index i = 2; i < n; ++i)
    if (abs((s.times[i] - s.times[i - 1]) - step) > Scalar(1e-9) * step)
      throw Error(ErrorCode::UnevenSpacing, "samples are not evenly spaced",
                  static_cast<std::size_t>(i));

  const Vector<Scalar> x = s.values.array() - s.values.mean();
  const Scalar variance = x.squaredNorm() / Scalar(n);
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;

  Periodogram<Scalar> pg{grid, Vector<Scalar>(grid.size()), Estimator::Classic, norm, {}, n};
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> arg = (two_pi * grid[i]) * s.times.array();
    const Scalar c = (x.array() * arg.cos()).sum();
    const Scalar sn = (x.array() * arg.sin()).sum();
    Scalar p = (c * c + sn * sn) / Scalar(n);
    if (norm == Normalization::Variance) p = variance > Scalar(0) ? p / variance : Scalar(0);
    pg.power[i] = detail::clamp_power(p);
  }
  return pg;
}

/// Generalised Lomb-Scargle periodogram with a floating mean. `weights`
/// (e.g. 1/sigma^2) default to equal weights.
template <typename Scalar>
Periodogram<Scalar> lomb_scargle(const Samples<Scalar>& s, const FrequencyGrid<Scalar>& grid,
                                 Normalization norm = Normalization::Raw,
                                 const Vector<Scalar>* weights = nullptr) {
  const Eigen::Index n = s.size();
  if (n < 3) throw Error(ErrorCode::TooFewSamples, "Lomb-Scargle needs at least 3 samples");
  if (!(s.times[n - 1] > s.times[0]))
    throw Error(ErrorCode::DegenerateTimes, "all samples share one instant");

  Vector<Scalar> w;
  if (weights) {
    if (weights->size() != n || (weights->array() <= Scalar(0)).any())
      throw Error(ErrorCode::InvalidConfig, "weights must be positive, one per sample");
    w = *weights / weights->sum();
  } else {
    w = Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  }

  const auto y = s.values.array();
  const Scalar y_mean = (w.array() * y).sum();
  const Scalar yy = (w.array() * y * y).sum() - y_mean * y_mean;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar scale = Scalar(n) / Scalar(2);
  const Scalar eps = Scalar(64) * std::numeric_limits<Scalar>::epsilon();

  Periodogram<Scalar> pg{grid, Vector<Scalar>(grid.size()), Estimator::LombScargle, norm, {}, n};
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> arg = (two_pi * grid[i]) * s.times.array();
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> cs = arg.cos();
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> sn = arg.sin();
    const auto wa = w.array();
    const Scalar c = (wa * cs).sum();
    const Scalar sv = (wa * sn).sum();
    const Scalar yc = (wa * y * cs).sum() - y_mean * c;
    const Scalar ys = (wa * y * sn).sum() - y_mean * sv;
    const Scalar cc = (wa * cs * cs).sum() - c * c;
    const Scalar ss = (wa * sn * sn).sum() - sv * sv;
    const Scalar cs_ = (wa * cs * sn).sum() - c * sv;
    const Scalar det = cc * ss - cs_ * cs_;

    Scalar reduction;
    if (det > eps * std::max(cc * ss, eps)) {
      reduction = (ss * yc * yc + cc * ys * ys - Scalar(2) * cs_ * yc * ys) / det;
    } else if (cc > eps) {
      reduction = yc * yc / cc;  // sine column vanishes (e.g. Nyquist)
    } else if (ss > eps) {
      reduction = ys * ys / ss;
    } else {
      reduction = Scalar(0);
    }
    Scalar p = scale * reduction;
    if (norm == Normalization::Variance) p = yy > Scalar(0) ? p / yy : Scalar(0);
    pg.power[i] = detail::clamp_power(p);
  }
  return pg;
}

/// Power at the grid point for `period_hours`; never interpolates.
template <typename Scalar>
Scalar intensity_at(const Periodogram<Scalar>& pg, Scalar period_hours) {
  if (!(period_hours > Scalar(0)))
    throw Error(ErrorCode::PeriodNotOnGrid, "period must be positive");
  if (auto idx = pg.grid.find(Scalar(1) / period_hours)) return pg.power[*idx];
  throw Error(ErrorCode::PeriodNotOnGrid,
              "no grid point at period " + std::to_string(static_cast<double>(period_hours)) + " h");
}

template <typename Scalar>
Periodogram<Scalar> estimate(Estimator e, const Samples<Scalar>& s, const FrequencyGrid<Scalar>& grid,
                             Normalization norm = Normalization::Raw) {
  return e == Estimator::Classic ? classic_periodogram(s, grid, norm) : lomb_scargle(s, grid, norm);
}

}  // namespace meterrhythm
