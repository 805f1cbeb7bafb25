#pragma once

// Procedural generator of flapping-flag clips. Motion frequency encodes the
// wind speed through f = U / L, so a rendered clip carries the same
// speed-to-frequency information a real flag video would, including the
// aliasing breakdown above the Nyquist-limited speed.

#include <functional>
#include <string>
#include <vector>

#include "wanem/core.hpp"

namespace wanem::flagsim {

struct PhysicalSetup {
    double flag_length_m = 1.5;    // L
    double frame_rate_hz = 15.0;   // f_s
    double clip_duration_s = 2.0;  // T
    int frame_height_px = 32;
    int frame_width_px = 32;

    int frames_per_clip() const;   // round(T * f_s)
    void validate() const;
};

// Instantaneous wind speed sampled on the frame grid (dt = 1/f_s).
struct WindSeries {
    double mean_speed_mps = 0.0;          // driving mean
    double turbulence_intensity = 0.0;    // sigma_u / mean, stationary target
    double averaging_window_s = 60.0;     // label window length
    double dt_s = 1.0 / 15.0;
    std::vector<double> instantaneous_mps;

    double duration_s() const { return static_cast<double>(instantaneous_mps.size()) * dt_s; }

    // Mean over samples whose times fall in [t0, t1), clamped to the series.
    double mean_over(double t0, double t1) const;
};

struct FlagRenderSpec {
    double amplitude_px = 10.0;
    int wave_mode = 1;
    double background_level = 0.2;
    double background_drift_per_s = 0.0;  // slow additive background change
    double band_halfwidth_px = 2.0;       // half-thickness of the flag silhouette

    void validate(const PhysicalSetup& setup) const;
};

// f = U / L.
double characteristic_frequency(double u_mps, const PhysicalSetup& setup);

// AR(1) (discretized Ornstein-Uhlenbeck) fluctuation around the mean with a
// 1 s correlation time and stationary standard deviation intensity * mean;
// samples clamped at zero. intensity must be in [0, 1].
WindSeries synthesize_wind_series(double mean_mps, double intensity,
                                  const PhysicalSetup& setup, Rng& rng,
                                  double duration_s);

// Phase accumulated by integrating characteristic_frequency(u(t)) from t0 to
// t1 on the series' sample grid. Returned in cycles.
double integrate_phase_cycles(const WindSeries& series, const PhysicalSetup& setup,
                              double t0, double t1);

// Renders one clip starting at clip_start_s. Frame k (time t_k) draws the
// flag silhouette: vertical displacement at column x is
//   amplitude * sin(2*pi*phi(t_k) - wave_mode*pi*x/W),
// where phi integrates the characteristic frequency over the series and the
// rng supplies an initial phase. Pixels are 1.0 inside the band and the
// (drifting, clamped) background level outside.
ClipTensor render_clip(const WindSeries& series, const FlagRenderSpec& spec,
                       const PhysicalSetup& setup, double clip_start_s, Rng& rng);

enum class LabelWindowMode { centered, leading, trailing };

// Writes one rendered clip (or a derived artifact) and returns the stored
// path. The default writer emits clip files in the core binary format; the
// CLI substitutes a feature-extracting writer for `gen --format features`.
using ClipWriter = std::function<std::string(
    const ClipTensor& clip, const std::string& clip_id, const std::string& out_dir)>;

ClipWriter default_clip_writer();

struct GenerateOptions {
    std::vector<double> speeds;
    int clips_per_speed = 1;
    double intensity = 0.15;
    double label_window_s = 60.0;
    LabelWindowMode label_window_mode = LabelWindowMode::centered;
    double series_duration_s = 0.0;   // 0 = clips_per_speed * clip_duration
    int threads = 1;
};

// For each mean speed: synthesizes a wind series, slices non-overlapping
// clips, labels each with the averaging-window mean around it, writes the
// clips through `writer`, and saves out_dir/manifest.csv. Clip rendering uses
// per-clip forked rng streams, so content is identical regardless of thread
// count.
DatasetManifest generate_dataset(const GenerateOptions& opts,
                                 const PhysicalSetup& setup,
                                 const FlagRenderSpec& spec, Rng& rng,
                                 const std::string& out_dir,
                                 const ClipWriter& writer = default_clip_writer());

} // namespace wanem::flagsim
