#include "wanem/core.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace wanem {

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

uint64_t Rng::next_u64() {
    // splitmix64 (Steele, Lea, Flood 2014)
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double Rng::normal() {
    // Box-Muller; the second deviate of the pair is discarded so the call
    // sequence maps 1:1 onto the underlying integer stream.
    double u1 = 1.0 - uniform01();   // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0) throw ValidationError("Rng::below: n must be positive");
    // rejection sampling to remove modulo bias
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

Rng Rng::fork(uint64_t stream) const {
    Rng mixer(state_ ^ (0xA0761D6478BD642Full + stream * 0xE7037ED1A0B428DBull));
    mixer.next_u64();
    return Rng(mixer.next_u64());
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

void ClipTensor::validate() const {
    if (height <= 0 || width <= 0)
        throw ValidationError("clip frame dimensions must be positive");
    if (num_frames < 2)
        throw ValidationError("clip must contain at least 2 frames");
    if (frame_rate_hz <= 0.0)
        throw ValidationError("frame rate must be positive");
    if (pixels.size() != static_cast<size_t>(height) * width * num_frames)
        throw ValidationError("clip pixel buffer does not match declared shape");
    for (double p : pixels)
        if (!(p >= 0.0 && p <= 1.0))
            throw ValidationError("clip pixel outside [0,1]");
}

std::string to_string(SourceTag tag) {
    switch (tag) {
        case SourceTag::train_flag: return "train_flag";
        case SourceTag::train_tree: return "train_tree";
        case SourceTag::adjacent_flag: return "adjacent_flag";
        case SourceTag::tunnel: return "tunnel";
        case SourceTag::synthetic: return "synthetic";
    }
    throw ValidationError("unknown source tag");
}

SourceTag source_tag_from_string(std::string_view s) {
    if (s == "train_flag") return SourceTag::train_flag;
    if (s == "train_tree") return SourceTag::train_tree;
    if (s == "adjacent_flag") return SourceTag::adjacent_flag;
    if (s == "tunnel") return SourceTag::tunnel;
    if (s == "synthetic") return SourceTag::synthetic;
    throw ValidationError("unknown source tag: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Binary I/O
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::ostream& out, uint32_t v) {
    std::array<char, 4> b{static_cast<char>(v & 0xFF),
                          static_cast<char>((v >> 8) & 0xFF),
                          static_cast<char>((v >> 16) & 0xFF),
                          static_cast<char>((v >> 24) & 0xFF)};
    out.write(b.data(), 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    put_u32(out, static_cast<uint32_t>(v & 0xFFFFFFFFull));
    put_u32(out, static_cast<uint32_t>(v >> 32));
}

void put_f32(std::ostream& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b;
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw IoError("truncated header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint64_t get_u64(std::istream& in) {
    uint64_t lo = get_u32(in);
    uint64_t hi = get_u32(in);
    return lo | (hi << 32);
}

struct Header {
    uint32_t d = 0;
    uint32_t t = 0;
    uint32_t reserved = 0;
    uint64_t clip_id_hash = 0;
};

void write_header(std::ostream& out, const char* magic, const Header& h) {
    out.write(magic, 8);
    put_u32(out, h.d);
    put_u32(out, h.t);
    put_u32(out, h.reserved);
    put_u64(out, h.clip_id_hash);
}

Header read_header(std::istream& in, const char* magic, const std::string& path) {
    std::array<char, 8> got{};
    in.read(got.data(), 8);
    if (!in || std::memcmp(got.data(), magic, 8) != 0)
        throw IoError("bad magic in " + path);
    Header h;
    h.d = get_u32(in);
    h.t = get_u32(in);
    h.reserved = get_u32(in);
    h.clip_id_hash = get_u64(in);

    // the declared dims must match the payload exactly, checked before any
    // allocation happens (u64 math cannot wrap: both dims are u32)
    const uint64_t values = static_cast<uint64_t>(h.d) * h.t;
    if (values > (UINT64_MAX - 28) / 4)
        throw IoError("implausible dimensions in " + path);
    const uint64_t expected = 28 + 4 * values;
    std::error_code ec;
    const auto actual = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat " + path);
    if (actual < expected) throw IoError("truncated payload in " + path);
    if (actual > expected)
        throw IoError("payload longer than header dims in " + path);
    return h;
}

std::vector<double> read_payload(std::istream& in, size_t count, const std::string& path) {
    std::vector<float> raw(count);
    for (size_t i = 0; i < count; ++i) {
        uint32_t bits;
        std::array<unsigned char, 4> b;
        in.read(reinterpret_cast<char*>(b.data()), 4);
        if (!in) throw IoError("truncated payload in " + path);
        bits = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
               (static_cast<uint32_t>(b[2]) << 16) |
               (static_cast<uint32_t>(b[3]) << 24);
        std::memcpy(&raw[i], &bits, 4);
    }
    std::vector<double> out(count);
    for (size_t i = 0; i < count; ++i) {
        if (!std::isfinite(raw[i]))
            throw IoError("non-finite feature in " + path);
        out[i] = static_cast<double>(raw[i]);
    }
    return out;
}

} // namespace

void write_feature_file(const FeatureSequence& seq, const std::string& path,
                        uint64_t clip_id_hash) {
    if (seq.empty()) throw ValidationError("empty feature sequence");
    if (seq.num_features <= 0 || seq.num_frames <= 0 ||
        seq.values.size() !=
            static_cast<size_t>(seq.num_features) * seq.num_frames)
        throw ValidationError("feature sequence shape inconsistent");
    if (static_cast<uint64_t>(seq.num_features) > UINT32_MAX ||
        static_cast<uint64_t>(seq.num_frames) > UINT32_MAX)
        throw ValidationError("feature dimensions overflow header fields");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    Header h{static_cast<uint32_t>(seq.num_features),
             static_cast<uint32_t>(seq.num_frames), 0, clip_id_hash};
    write_header(out, kFeatureMagic, h);
    for (double v : seq.values) {
        float f = static_cast<float>(v);
        if (!std::isfinite(f))
            throw ValidationError("non-finite feature value");
        put_f32(out, f);
    }
    if (!out) throw IoError("write failed: " + path);
}

FeatureSequence read_feature_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    Header h = read_header(in, kFeatureMagic, path);
    if (h.d == 0 || h.t == 0)
        throw IoError("zero dimension in header of " + path);
    FeatureSequence seq;
    seq.num_features = static_cast<int>(h.d);
    seq.num_frames = static_cast<int>(h.t);
    seq.values = read_payload(in, static_cast<size_t>(h.d) * h.t, path);
    return seq;
}

void write_clip_file(const ClipTensor& clip, const std::string& path,
                     uint64_t clip_id_hash) {
    clip.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    Header h{static_cast<uint32_t>(clip.height) * static_cast<uint32_t>(clip.width),
             static_cast<uint32_t>(clip.num_frames),
             static_cast<uint32_t>(clip.width),   // lets the reader recover H = D / W
             clip_id_hash};
    write_header(out, kClipMagic, h);
    for (double v : clip.pixels) put_f32(out, static_cast<float>(v));
    if (!out) throw IoError("write failed: " + path);
}

ClipTensor read_clip_file(const std::string& path, double frame_rate_hz,
                          double timestamp_s) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    Header h = read_header(in, kClipMagic, path);
    if (h.reserved == 0 || h.d == 0 || h.d % h.reserved != 0)
        throw IoError("inconsistent frame dimensions in " + path);
    ClipTensor clip;
    clip.width = static_cast<int>(h.reserved);
    clip.height = static_cast<int>(h.d / h.reserved);
    clip.num_frames = static_cast<int>(h.t);
    clip.frame_rate_hz = frame_rate_hz;
    clip.timestamp_s = timestamp_s;
    clip.pixels = read_payload(in, static_cast<size_t>(h.d) * h.t, path);
    return clip;
}

FileKind probe_file_kind(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::array<char, 8> magic{};
    in.read(magic.data(), 8);
    if (!in) throw IoError("truncated header in " + path);
    if (std::memcmp(magic.data(), kFeatureMagic, 8) == 0) return FileKind::feature;
    if (std::memcmp(magic.data(), kClipMagic, 8) == 0) return FileKind::clip;
    throw IoError("bad magic in " + path);
}

// ---------------------------------------------------------------------------
// Manifest CSV
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kManifestHeader = "clip_id,path,label_mps,timestamp_s,source_tag";

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty manifest: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kManifestHeader)
        throw ValidationError("manifest header mismatch in " + path);

    DatasetManifest manifest;
    std::set<std::string> seen;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 5)
            throw ValidationError("malformed manifest row at line " +
                                  std::to_string(lineno));
        ManifestRecord rec;
        rec.clip_id = fields[0];
        rec.path = fields[1];
        if (rec.clip_id.empty())
            throw ValidationError("empty clip_id at line " + std::to_string(lineno));
        try {
            rec.label_mps = parse_double(fields[2]);
            rec.timestamp_s = parse_double(fields[3]);
        } catch (const ValidationError&) {
            throw ValidationError("malformed manifest row at line " +
                                  std::to_string(lineno));
        }
        if (rec.label_mps < 0.0)
            throw ValidationError("negative label at line " + std::to_string(lineno));
        rec.source_tag = source_tag_from_string(fields[4]);
        if (!seen.insert(rec.clip_id).second)
            throw ValidationError("duplicate clip_id: " + rec.clip_id);
        // relative entries resolve against the manifest's own directory, so
        // a dataset directory can be moved (or compared byte for byte)
        if (!rec.path.empty() && !std::filesystem::path(rec.path).is_absolute()) {
            const auto parent = std::filesystem::path(path).parent_path();
            if (!parent.empty()) rec.path = (parent / rec.path).string();
        }
        manifest.records.push_back(std::move(rec));
    }
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out << kManifestHeader << '\n';
    for (const auto& rec : manifest.records) {
        out << rec.clip_id << ',' << rec.path << ',' << format_double(rec.label_mps)
            << ',' << format_double(rec.timestamp_s) << ','
            << to_string(rec.source_tag) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    std::array<char, 64> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc())
        throw ValidationError("cannot format double");
    return std::string(buf.data(), ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ValidationError("malformed number: " + std::string(s));
    return v;
}

long parse_long(std::string_view s) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ValidationError("malformed integer: " + std::string(s));
    return v;
}

} // namespace wanem
