#pragma once

// Physics interpretation layer: the wind-speed interval a given flag,
// frame rate and clip duration can resolve, and the turbulence-variability
// statistics that bound achievable prediction accuracy.

#include <span>
#include <string>
#include <vector>

#include "wanem/core.hpp"
#include "wanem/flagsim.hpp"

namespace wanem::physics {

struct MeasurableRange {
    double u_low_mps = 0.0;    // L / T
    double u_high_mps = 0.0;   // L * f_nyquist
    double f_nyquist_hz = 0.0; // 0.5 * f_s
};

MeasurableRange measurable_range(const flagsim::PhysicalSetup& setup);

// Published field-setup bounds used by default when reporting; the exact
// computed upper bound for that setup is 11.25.
inline constexpr double kFieldRangeLowMps = 0.75;
inline constexpr double kFieldRangeHighMps = 11.0;

struct TurbulenceStats {
    std::vector<double> bin_centers_mps;
    std::vector<double> sigma_u_per_bin;
    std::vector<size_t> count;
    double bin_width_mps = 0.5;
    double instantaneous_window_s = 2.0;
};

// One short-window "instantaneous" mean paired with the long-window mean of
// the block it belongs to.
struct FluctuationPair {
    double window_mean_mps = 0.0;   // long-window mean, the bin key
    double uprime_mps = 0.0;        // short-window mean minus window_mean
};

// Tiles the series into averaging_window_s blocks; inside each block the
// consecutive window_s means produce u' = short mean - block mean. The block
// mean covers exactly the samples its short windows cover, so u' sums to
// zero over every block up to rounding.
std::vector<FluctuationPair> fluctuation_pairs(const flagsim::WindSeries& series,
                                               double window_s,
                                               double averaging_window_s);

// u' values only, long window taken from series.averaging_window_s.
std::vector<double> fluctuation_series(const flagsim::WindSeries& series,
                                       double window_s);

// Bins the long-window means in bin_width increments (half-open intervals)
// and reports sigma_u = sqrt(mean u'^2) per occupied bin.
TurbulenceStats sigma_u_band(const flagsim::WindSeries& series, double bin_width,
                             double window_s = 2.0);

// Same, with pairs pooled across several series (one per driving speed).
TurbulenceStats sigma_u_band(std::span<const flagsim::WindSeries> series,
                             double bin_width, double window_s = 2.0);

// CSV: bin_center_mps,sigma_u_mps,count
void write_sigma_csv(const TurbulenceStats& stats, const std::string& path);

} // namespace wanem::physics
