#include "wanem/flagsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "wanem/parallel.hpp"

namespace wanem::flagsim {

int PhysicalSetup::frames_per_clip() const {
    return static_cast<int>(std::llround(clip_duration_s * frame_rate_hz));
}

void PhysicalSetup::validate() const {
    if (flag_length_m <= 0.0) throw ValidationError("flag length must be positive");
    if (frame_rate_hz <= 0.0) throw ValidationError("frame rate must be positive");
    if (clip_duration_s <= 0.0) throw ValidationError("clip duration must be positive");
    if (frame_height_px <= 0 || frame_width_px <= 0)
        throw ValidationError("frame dimensions must be positive");
    if (frames_per_clip() < 2)
        throw ValidationError("clip must span at least 2 frames");
}

void FlagRenderSpec::validate(const PhysicalSetup& setup) const {
    if (amplitude_px <= 0.0) throw ValidationError("amplitude must be positive");
    if (amplitude_px >= setup.frame_height_px / 2.0)
        throw ValidationError("amplitude must be below half the frame height");
    if (wave_mode < 1) throw ValidationError("wave mode must be positive");
    if (background_level < 0.0 || background_level > 1.0)
        throw ValidationError("background level must be in [0,1]");
    if (band_halfwidth_px <= 0.0)
        throw ValidationError("band half-width must be positive");
}

double characteristic_frequency(double u_mps, const PhysicalSetup& setup) {
    if (u_mps < 0.0) throw ValidationError("wind speed must be nonnegative");
    return u_mps / setup.flag_length_m;
}

double WindSeries::mean_over(double t0, double t1) const {
    const size_t n = instantaneous_mps.size();
    long first = std::max<long>(0, static_cast<long>(std::ceil(t0 / dt_s - 1e-9)));
    long last = std::min<long>(static_cast<long>(n),
                               static_cast<long>(std::floor(t1 / dt_s + 1e-9)));
    if (last <= first) throw ValidationError("empty averaging window");
    double sum = 0.0;
    for (long k = first; k < last; ++k) sum += instantaneous_mps[static_cast<size_t>(k)];
    return sum / static_cast<double>(last - first);
}

WindSeries synthesize_wind_series(double mean_mps, double intensity,
                                  const PhysicalSetup& setup, Rng& rng,
                                  double duration_s) {
    setup.validate();
    if (mean_mps < 0.0) throw ValidationError("mean speed must be nonnegative");
    if (intensity < 0.0) throw ValidationError("intensity must be nonnegative");
    if (intensity > 1.0) throw ValidationError("intensity must be <= 1");
    if (duration_s <= 0.0) throw ValidationError("series duration must be positive");

    WindSeries series;
    series.mean_speed_mps = mean_mps;
    series.turbulence_intensity = intensity;
    series.dt_s = 1.0 / setup.frame_rate_hz;
    const size_t n = static_cast<size_t>(std::llround(duration_s * setup.frame_rate_hz));
    series.instantaneous_mps.resize(n);

    const double sigma = intensity * mean_mps;
    if (sigma == 0.0) {
        std::fill(series.instantaneous_mps.begin(), series.instantaneous_mps.end(),
                  mean_mps);
        return series;
    }

    constexpr double kCorrelationTimeS = 1.0;
    const double rho = std::exp(-series.dt_s / kCorrelationTimeS);
    const double noise_sigma = sigma * std::sqrt(1.0 - rho * rho);

    // Start from the stationary distribution so short series are unbiased.
    double uprime = sigma * rng.normal();
    for (size_t k = 0; k < n; ++k) {
        series.instantaneous_mps[k] = std::max(0.0, mean_mps + uprime);
        uprime = rho * uprime + noise_sigma * rng.normal();
    }
    return series;
}

namespace {

size_t sample_index(const WindSeries& series, double t) {
    long idx = std::llround(t / series.dt_s);
    idx = std::clamp<long>(idx, 0, static_cast<long>(series.instantaneous_mps.size()) - 1);
    return static_cast<size_t>(idx);
}

} // namespace

double integrate_phase_cycles(const WindSeries& series, const PhysicalSetup& setup,
                              double t0, double t1) {
    if (t1 < t0) throw ValidationError("invalid integration window");
    const size_t first = sample_index(series, t0);
    const size_t last = sample_index(series, t1);
    double phase = 0.0;
    for (size_t k = first; k < last; ++k)
        phase += characteristic_frequency(series.instantaneous_mps[k], setup) * series.dt_s;
    return phase;
}

ClipTensor render_clip(const WindSeries& series, const FlagRenderSpec& spec,
                       const PhysicalSetup& setup, double clip_start_s, Rng& rng) {
    setup.validate();
    spec.validate(setup);

    const int frames = setup.frames_per_clip();
    const double dt = 1.0 / setup.frame_rate_hz;
    const double clip_end = clip_start_s + setup.clip_duration_s;
    if (clip_start_s < -1e-9 || clip_end > series.duration_s() + 1e-9)
        throw ValidationError("clip window out of series range");

    ClipTensor clip;
    clip.height = setup.frame_height_px;
    clip.width = setup.frame_width_px;
    clip.num_frames = frames;
    clip.frame_rate_hz = setup.frame_rate_hz;
    clip.timestamp_s = clip_start_s;
    clip.pixels.resize(static_cast<size_t>(frames) * clip.height * clip.width);

    const double phase_origin = rng.uniform01();
    // Centerline sits a quarter pixel off the grid so no integer row is an
    // exact mirror axis of the oscillation.
    const double centerline = (clip.height - 1) / 2.0 + 0.25;
    const size_t base = sample_index(series, clip_start_s);

    double phase = phase_origin;
    for (int k = 0; k < frames; ++k) {
        const double t_k = clip_start_s + k * dt;
        const double background =
            std::clamp(spec.background_level + spec.background_drift_per_s * t_k, 0.0, 1.0);
        for (int x = 0; x < clip.width; ++x) {
            const double displacement =
                spec.amplitude_px *
                std::sin(2.0 * M_PI * phase - spec.wave_mode * M_PI * x / clip.width);
            const double flag_center = centerline + displacement;
            for (int y = 0; y < clip.height; ++y) {
                const bool inside = std::abs(y - flag_center) <= spec.band_halfwidth_px;
                clip.at(k, y, x) = inside ? 1.0 : background;
            }
        }
        const size_t idx = std::min(base + static_cast<size_t>(k),
                                    series.instantaneous_mps.size() - 1);
        phase += characteristic_frequency(series.instantaneous_mps[idx], setup) * dt;
    }
    return clip;
}

ClipWriter default_clip_writer() {
    // returns the manifest-relative name so the dataset is relocatable and
    // reruns into different directories stay byte-identical
    return [](const ClipTensor& clip, const std::string& clip_id,
              const std::string& out_dir) {
        const std::string name = clip_id + ".wclip";
        write_clip_file(clip, out_dir + "/" + name, fnv1a64(clip_id));
        return name;
    };
}

namespace {

struct ClipTask {
    size_t record_index;
    size_t speed_index;
    int clip_index;
    double clip_start_s;
    double label_mps;
    std::string clip_id;
    Rng rng;
};

void label_window(const GenerateOptions& opts, const PhysicalSetup& setup,
                  double clip_start, double span, double& w0, double& w1) {
    const double w = opts.label_window_s;
    switch (opts.label_window_mode) {
        case LabelWindowMode::centered: {
            const double center = clip_start + setup.clip_duration_s / 2.0;
            w0 = center - w / 2.0;
            w1 = center + w / 2.0;
            break;
        }
        case LabelWindowMode::leading:
            w0 = clip_start;
            w1 = clip_start + w;
            break;
        case LabelWindowMode::trailing:
            w0 = clip_start + setup.clip_duration_s - w;
            w1 = clip_start + setup.clip_duration_s;
            break;
    }
    w0 = std::max(0.0, w0);
    w1 = std::min(span, w1);
}

} // namespace

DatasetManifest generate_dataset(const GenerateOptions& opts,
                                 const PhysicalSetup& setup,
                                 const FlagRenderSpec& spec, Rng& rng,
                                 const std::string& out_dir,
                                 const ClipWriter& writer) {
    setup.validate();
    spec.validate(setup);
    if (opts.speeds.empty()) throw ValidationError("speed list must be nonempty");
    if (opts.clips_per_speed < 1)
        throw ValidationError("clips per speed must be positive");
    if (opts.intensity > 1.0) throw ValidationError("intensity must be <= 1");
    if (opts.label_window_s <= 0.0)
        throw ValidationError("label window must be positive");

    const double needed = opts.clips_per_speed * setup.clip_duration_s;
    const double span = opts.series_duration_s > 0.0 ? opts.series_duration_s : needed;
    if (needed > span + 1e-9)
        throw ValidationError("requested clips exceed series duration");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);

    // Plan every clip up front with its own forked rng so rendering order
    // (and thread count) cannot change the output.
    std::vector<ClipTask> tasks;
    std::vector<WindSeries> series_per_speed(opts.speeds.size());
    DatasetManifest manifest;
    for (size_t si = 0; si < opts.speeds.size(); ++si) {
        Rng speed_rng = rng.fork(si);
        series_per_speed[si] =
            synthesize_wind_series(opts.speeds[si], opts.intensity, setup, speed_rng, span);
        for (int ci = 0; ci < opts.clips_per_speed; ++ci) {
            ClipTask task{0, si, ci, ci * setup.clip_duration_s, 0.0, "", speed_rng.fork(ci)};
            double w0 = 0.0, w1 = 0.0;
            label_window(opts, setup, task.clip_start_s, span, w0, w1);
            task.label_mps = series_per_speed[si].mean_over(w0, w1);
            char id[64];
            std::snprintf(id, sizeof id, "s%03zu_c%05d", si, ci);
            task.clip_id = id;
            task.record_index = manifest.records.size();
            manifest.records.push_back(ManifestRecord{
                task.clip_id, "", task.label_mps, task.clip_start_s, SourceTag::synthetic});
            tasks.push_back(std::move(task));
        }
    }

    parallel_for(tasks.size(), opts.threads, [&](size_t i) {
        ClipTask& task = tasks[i];
        ClipTensor clip = render_clip(series_per_speed[task.speed_index], spec,
                                      setup, task.clip_start_s, task.rng);
        manifest.records[task.record_index].path =
            writer(clip, task.clip_id, out_dir);
    });

    save_manifest(manifest, out_dir + "/manifest.csv");
    // reload so the returned records carry resolved, usable paths
    return load_manifest(out_dir + "/manifest.csv");
}

} // namespace wanem::flagsim
