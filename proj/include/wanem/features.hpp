#pragma once

// Clip-to-feature conversion. The extractor is pluggable: pooled per-patch
// statistics built in, or precomputed feature files ingested as-is. Temporal
// mean subtraction implements the nm (no-mean) input variant that removes
// static background content from a clip.

#include <vector>

#include "wanem/core.hpp"

namespace wanem::features {

enum class ExtractorKind { pooled_stats, external_file };

struct ExtractorSpec {
    ExtractorKind kind = ExtractorKind::pooled_stats;
    int patch_px = 4;
    // Per-patch statistics, in fixed channel order when enabled.
    bool stat_mean = true;
    bool stat_std = true;
    bool stat_max = true;
    bool stat_frame_diff = true;   // mean |pixel - previous frame pixel|, 0 at t=0
    bool relu_clamp = true;
    int pool_filter = 3;
    int pool_stride = 2;

    int num_stats() const {
        return (stat_mean ? 1 : 0) + (stat_std ? 1 : 0) + (stat_max ? 1 : 0) +
               (stat_frame_diff ? 1 : 0);
    }
    void validate() const;
};

// Feature dimension produced by `extract` for the given frame size.
// Depends only on the spec and dimensions, never on content.
int feature_dim(const ExtractorSpec& spec, int frame_height, int frame_width);

// Per frame: center-crop to the largest patch_px-divisible region, compute
// the enabled statistics per patch, optionally clamp at zero, max-pool the
// patch grid with (pool_filter, pool_stride), then flatten channel-major.
FeatureSequence extract(const ClipTensor& clip, const ExtractorSpec& spec);

// out[d,t] = in[d,t] - mean_t(in[d,.]). Rejects double subtraction.
FeatureSequence subtract_temporal_mean(const FeatureSequence& seq);

enum class Variant { nm, raw };

std::string to_string(Variant v);
Variant variant_from_string(std::string_view s);

// Loads every manifest record (feature files directly, clip files through
// the extractor), applies mean subtraction iff variant == nm, and attaches
// labels. All samples must agree on the feature dimension. Records load on
// up to `threads` workers; the output order always follows the manifest.
std::vector<Sample> prepare_inputs(const DatasetManifest& manifest,
                                   const ExtractorSpec& spec, Variant variant,
                                   double frame_rate_hz = 15.0, int threads = 1);

} // namespace wanem::features
