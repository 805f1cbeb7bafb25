#pragma once

// Shared domain types, deterministic RNG, and the binary/CSV file formats
// used by every other wanem module.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wanem {

// Error categories; the CLI maps them onto exit codes 2/3/4.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int epoch)
        : std::runtime_error(what), epoch(epoch) {}
    int epoch;
};

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

// Deterministic 64-bit generator (splitmix64). The algorithm is fixed so a
// seed reproduces the same stream on every platform; uniform and normal
// deviates are derived here rather than via std::distributions, whose output
// is not portable across standard libraries. Normals use Box-Muller; their
// cross-platform bit-identity additionally rests on the libm rounding of
// log/cos (integer and uniform output is exact everywhere).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64();
    double uniform01();                     // [0, 1), 53-bit resolution
    double uniform(double lo, double hi);
    double normal();                        // standard normal
    uint64_t below(uint64_t n);             // unbiased draw from [0, n)

    // Independent child stream keyed by (current seed, stream id). Used to
    // give every clip its own generator so rendering can run in parallel.
    Rng fork(uint64_t stream) const;

    uint64_t seed() const { return state_; }

private:
    uint64_t state_;
};

// FNV-1a, used for the clip-id hash stored in binary file headers.
uint64_t fnv1a64(std::string_view s);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// One observation window: T frames of HxW grayscale pixels in [0,1],
// frame-major storage.
struct ClipTensor {
    int height = 0;
    int width = 0;
    int num_frames = 0;
    double frame_rate_hz = 0.0;
    double timestamp_s = 0.0;
    std::vector<double> pixels;   // pixels[t*H*W + y*W + x]

    double at(int t, int y, int x) const {
        return pixels[static_cast<size_t>(t) * height * width +
                      static_cast<size_t>(y) * width + x];
    }
    double& at(int t, int y, int x) {
        return pixels[static_cast<size_t>(t) * height * width +
                      static_cast<size_t>(y) * width + x];
    }

    // Enforces frame count, pixel range and shape consistency.
    void validate() const;
};

// Per-frame feature vectors, frame-major: values[t*D + d].
struct FeatureSequence {
    int num_features = 0;   // D
    int num_frames = 0;     // T
    bool mean_subtracted = false;
    std::vector<double> values;

    double at(int d, int t) const {
        return values[static_cast<size_t>(t) * num_features + d];
    }
    double& at(int d, int t) {
        return values[static_cast<size_t>(t) * num_features + d];
    }

    bool empty() const { return values.empty(); }

    friend bool operator==(const FeatureSequence& a, const FeatureSequence& b) {
        return a.num_features == b.num_features && a.num_frames == b.num_frames &&
               a.mean_subtracted == b.mean_subtracted && a.values == b.values;
    }
};

enum class SourceTag { train_flag, train_tree, adjacent_flag, tunnel, synthetic };

std::string to_string(SourceTag tag);
SourceTag source_tag_from_string(std::string_view s);

struct Sample {
    FeatureSequence features;
    double label_mps = 0.0;
    std::string clip_id;
    SourceTag source_tag = SourceTag::synthetic;
};

struct ManifestRecord {
    std::string clip_id;
    std::string path;
    double label_mps = 0.0;
    double timestamp_s = 0.0;
    SourceTag source_tag = SourceTag::synthetic;
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;

    size_t n() const { return records.size(); }
};

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------
//
// Feature file ("WANEMF01"):
//   magic[8] | u32 D | u32 T | u32 reserved=0 | u64 clip_id_hash |
//   D*T float32, frame-major (frame 0's D values first)
// Clip file ("WANEMC01"): same header layout with D = H*W and the reserved
//   word carrying W (so H is recoverable); payload H*W*T float32.
// All integers and floats little-endian.

inline constexpr char kFeatureMagic[9] = "WANEMF01";
inline constexpr char kClipMagic[9] = "WANEMC01";

enum class FileKind { feature, clip };

void write_feature_file(const FeatureSequence& seq, const std::string& path,
                        uint64_t clip_id_hash = 0);
FeatureSequence read_feature_file(const std::string& path);

void write_clip_file(const ClipTensor& clip, const std::string& path,
                     uint64_t clip_id_hash = 0);
ClipTensor read_clip_file(const std::string& path, double frame_rate_hz,
                          double timestamp_s);

// Inspects the magic bytes without reading the payload.
FileKind probe_file_kind(const std::string& path);

// Manifest CSV: header `clip_id,path,label_mps,timestamp_s,source_tag`,
// UTF-8, '.' decimal separator. Parsing is total: any malformed row throws,
// never yielding a partial manifest.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

// Shortest round-trip decimal form, locale independent. Every CSV and text
// output goes through this so reruns are byte-identical.
std::string format_double(double v);
double parse_double(std::string_view s);   // strict: full consumption or throw
long parse_long(std::string_view s);

} // namespace wanem
