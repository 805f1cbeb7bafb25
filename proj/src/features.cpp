#include "wanem/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wanem/parallel.hpp"

namespace wanem::features {

void ExtractorSpec::validate() const {
    if (patch_px < 1) throw ValidationError("patch size must be positive");
    if (pool_filter < 1 || pool_stride < 1)
        throw ValidationError("pool filter and stride must be positive");
    if (num_stats() == 0) throw ValidationError("at least one statistic must be enabled");
}

namespace {

struct Grid {
    int crop_top, crop_left;     // center-crop offsets
    int patches_h, patches_w;    // patch grid
    int pooled_h, pooled_w;      // after max-pool
};

Grid plan_grid(const ExtractorSpec& spec, int frame_height, int frame_width) {
    spec.validate();
    Grid g;
    g.patches_h = frame_height / spec.patch_px;
    g.patches_w = frame_width / spec.patch_px;
    if (g.patches_h < 1 || g.patches_w < 1)
        throw ValidationError("frame smaller than one patch");
    g.crop_top = (frame_height - g.patches_h * spec.patch_px) / 2;
    g.crop_left = (frame_width - g.patches_w * spec.patch_px) / 2;
    if (g.patches_h < spec.pool_filter || g.patches_w < spec.pool_filter)
        throw ValidationError("patch grid smaller than pool filter");
    g.pooled_h = (g.patches_h - spec.pool_filter) / spec.pool_stride + 1;
    g.pooled_w = (g.patches_w - spec.pool_filter) / spec.pool_stride + 1;
    return g;
}

} // namespace

int feature_dim(const ExtractorSpec& spec, int frame_height, int frame_width) {
    Grid g = plan_grid(spec, frame_height, frame_width);
    return spec.num_stats() * g.pooled_h * g.pooled_w;
}

FeatureSequence extract(const ClipTensor& clip, const ExtractorSpec& spec) {
    clip.validate();
    Grid g = plan_grid(spec, clip.height, clip.width);

    const int n_stats = spec.num_stats();
    const int grid_size = g.patches_h * g.patches_w;
    const int pooled_size = g.pooled_h * g.pooled_w;

    FeatureSequence seq;
    seq.num_features = n_stats * pooled_size;
    seq.num_frames = clip.num_frames;
    seq.values.resize(static_cast<size_t>(seq.num_features) * seq.num_frames);

    // stats[channel * grid_size + patch]
    std::vector<double> stats(static_cast<size_t>(n_stats) * grid_size);
    const int p = spec.patch_px;
    const double patch_area = static_cast<double>(p) * p;

    for (int t = 0; t < clip.num_frames; ++t) {
        for (int py = 0; py < g.patches_h; ++py) {
            for (int px = 0; px < g.patches_w; ++px) {
                const int y0 = g.crop_top + py * p;
                const int x0 = g.crop_left + px * p;
                double sum = 0.0, sum_sq = 0.0, maxv = 0.0, diff_sum = 0.0;
                for (int y = y0; y < y0 + p; ++y) {
                    for (int x = x0; x < x0 + p; ++x) {
                        const double v = clip.at(t, y, x);
                        sum += v;
                        sum_sq += v * v;
                        maxv = std::max(maxv, v);
                        if (t > 0) diff_sum += std::abs(v - clip.at(t - 1, y, x));
                    }
                }
                const double mean = sum / patch_area;
                const double var = std::max(0.0, sum_sq / patch_area - mean * mean);
                const int patch = py * g.patches_w + px;
                int channel = 0;
                if (spec.stat_mean) stats[channel++ * grid_size + patch] = mean;
                if (spec.stat_std) stats[channel++ * grid_size + patch] = std::sqrt(var);
                if (spec.stat_max) stats[channel++ * grid_size + patch] = maxv;
                if (spec.stat_frame_diff)
                    stats[channel++ * grid_size + patch] = diff_sum / patch_area;
            }
        }
        if (spec.relu_clamp)
            for (double& s : stats) s = std::max(0.0, s);

        // spatial max-pool per channel, flatten channel-major
        for (int c = 0; c < n_stats; ++c) {
            const double* channel = &stats[static_cast<size_t>(c) * grid_size];
            for (int oy = 0; oy < g.pooled_h; ++oy) {
                for (int ox = 0; ox < g.pooled_w; ++ox) {
                    double m = -std::numeric_limits<double>::infinity();
                    for (int fy = 0; fy < spec.pool_filter; ++fy) {
                        const int row = oy * spec.pool_stride + fy;
                        for (int fx = 0; fx < spec.pool_filter; ++fx) {
                            const int col = ox * spec.pool_stride + fx;
                            m = std::max(m, channel[row * g.patches_w + col]);
                        }
                    }
                    seq.at(c * pooled_size + oy * g.pooled_w + ox, t) = m;
                }
            }
        }
    }
    return seq;
}

FeatureSequence subtract_temporal_mean(const FeatureSequence& seq) {
    if (seq.empty()) throw ValidationError("empty feature sequence");
    if (seq.mean_subtracted)
        throw ValidationError("temporal mean already subtracted");

    FeatureSequence out = seq;
    out.mean_subtracted = true;
    const int d_count = seq.num_features;
    const int t_count = seq.num_frames;
    for (int d = 0; d < d_count; ++d) {
        double sum = 0.0;
        for (int t = 0; t < t_count; ++t) sum += seq.at(d, t);
        const double mean = sum / t_count;
        for (int t = 0; t < t_count; ++t) out.at(d, t) = seq.at(d, t) - mean;
    }
    return out;
}

std::string to_string(Variant v) {
    return v == Variant::nm ? "nm" : "raw";
}

Variant variant_from_string(std::string_view s) {
    if (s == "nm") return Variant::nm;
    if (s == "raw") return Variant::raw;
    throw ValidationError("unknown variant: " + std::string(s));
}

std::vector<Sample> prepare_inputs(const DatasetManifest& manifest,
                                   const ExtractorSpec& spec, Variant variant,
                                   double frame_rate_hz, int threads) {
    if (manifest.records.empty())
        throw ValidationError("manifest has no records");

    std::vector<Sample> samples(manifest.records.size());
    parallel_for(manifest.records.size(), threads, [&](size_t k) {
        const auto& rec = manifest.records[k];
        FeatureSequence seq;
        switch (probe_file_kind(rec.path)) {
            case FileKind::feature:
                seq = read_feature_file(rec.path);
                break;
            case FileKind::clip: {
                if (spec.kind == ExtractorKind::external_file)
                    throw ValidationError(
                        "extractor 'external_file' cannot process clip file: " + rec.path);
                ClipTensor clip = read_clip_file(rec.path, frame_rate_hz, rec.timestamp_s);
                seq = extract(clip, spec);
                break;
            }
        }
        if (variant == Variant::nm) seq = subtract_temporal_mean(seq);

        Sample& s = samples[k];
        s.features = std::move(seq);
        s.label_mps = rec.label_mps;
        s.clip_id = rec.clip_id;
        s.source_tag = rec.source_tag;
    });

    const int expected_dim = samples.front().features.num_features;
    for (size_t k = 1; k < samples.size(); ++k)
        if (samples[k].features.num_features != expected_dim)
            throw ValidationError("inconsistent feature dimension in " +
                                  manifest.records[k].path);
    return samples;
}

} // namespace wanem::features
