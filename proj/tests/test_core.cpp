#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wanem/core.hpp"

using namespace wanem;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

FeatureSequence random_float_sequence(int d_count, int t_count, Rng& rng) {
    FeatureSequence seq;
    seq.num_features = d_count;
    seq.num_frames = t_count;
    seq.values.resize(static_cast<size_t>(d_count) * t_count);
    for (auto& v : seq.values)
        v = static_cast<double>(static_cast<float>(rng.uniform(-100.0, 100.0)));
    return seq;
}

} // namespace

TEST_CASE("rng streams are reproducible and fork independent") {
    Rng a(42), b(42);
    for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());

    Rng base(42);
    Rng f0 = base.fork(0);
    Rng f1 = base.fork(1);
    CHECK(f0.next_u64() != f1.next_u64());
    // forking does not advance the parent
    Rng base2(42);
    base2.fork(7);
    Rng ref(42);
    CHECK(base2.next_u64() == ref.next_u64());
}

TEST_CASE("rng uniform01 stays in [0,1) and below() respects its bound") {
    Rng rng(7);
    for (int k = 0; k < 1000; ++k) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.below(13) < 13);
    }
    CHECK_THROWS_AS(rng.below(0), ValidationError);
}

TEST_CASE("rng normal has roughly standard moments") {
    Rng rng(11);
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("fnv1a64 matches reference values") {
    CHECK(fnv1a64("") == 0xCBF29CE484222325ull);
    CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8Cull);
}

TEST_CASE("feature file header is 28 bytes and round-trips a 1x1 sequence") {
    FeatureSequence seq;
    seq.num_features = 1;
    seq.num_frames = 1;
    seq.values = {2.0};
    const std::string path = temp_path("wanem_feat_1x1.wfeat");
    write_feature_file(seq, path);
    CHECK(std::filesystem::file_size(path) == 28 + 4);
    CHECK(read_feature_file(path) == seq);
}

TEST_CASE("writing an empty feature sequence is rejected") {
    FeatureSequence seq;
    CHECK_THROWS_WITH_AS(write_feature_file(seq, temp_path("x.wfeat")),
                         "empty feature sequence", ValidationError);
}

TEST_CASE("feature file round trip is bit-exact over 100 seeded sequences") {
    Rng rng(1234);
    const std::string path = temp_path("wanem_feat_rt.wfeat");
    for (int trial = 0; trial < 100; ++trial) {
        const auto seq = random_float_sequence(64, 30, rng);
        write_feature_file(seq, path, rng.next_u64());
        CHECK(read_feature_file(path) == seq);
    }
}

TEST_CASE("feature file reader rejects corrupt inputs") {
    const std::string good = temp_path("wanem_feat_good.wfeat");
    FeatureSequence seq;
    seq.num_features = 2;
    seq.num_frames = 3;
    seq.values = {1, 2, 3, 4, 5, 6};
    write_feature_file(seq, good);

    SUBCASE("bad magic") {
        const std::string path = temp_path("wanem_feat_badmagic.bin");
        std::ofstream out(path, std::ios::binary);
        out << "XXNOPE00" << std::string(20 + 24, '\0');
        out.close();
        CHECK_THROWS_AS(read_feature_file(path), IoError);
    }
    SUBCASE("truncated payload") {
        std::ifstream in(good, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        const std::string path = temp_path("wanem_feat_trunc.wfeat");
        std::ofstream out(path, std::ios::binary);
        out.write(bytes.data(), static_cast<long>(bytes.size()) - 5);
        out.close();
        CHECK_THROWS_AS(read_feature_file(path), IoError);
    }
    SUBCASE("trailing bytes beyond the declared dims") {
        std::ifstream in(good, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        bytes += "junk";
        const std::string path = temp_path("wanem_feat_long.wfeat");
        std::ofstream out(path, std::ios::binary);
        out.write(bytes.data(), static_cast<long>(bytes.size()));
        out.close();
        CHECK_THROWS_AS(read_feature_file(path), IoError);
    }
    SUBCASE("implausible header dims fail before allocating") {
        const std::string path = temp_path("wanem_feat_huge.wfeat");
        std::ofstream out(path, std::ios::binary);
        out << "WANEMF01";
        // D = T = 0xFFFFFFFF, reserved 0, hash 0, no payload
        for (int k = 0; k < 8; ++k) out.put('\xFF');
        for (int k = 0; k < 12; ++k) out.put('\0');
        out.close();
        CHECK_THROWS_AS(read_feature_file(path), IoError);
    }
    SUBCASE("non-finite value") {
        std::ifstream in(good, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        // overwrite the first payload float with a NaN bit pattern
        bytes[28] = '\x00';
        bytes[29] = '\x00';
        bytes[30] = '\xC0';
        bytes[31] = '\x7F';
        const std::string path = temp_path("wanem_feat_nan.wfeat");
        std::ofstream out(path, std::ios::binary);
        out.write(bytes.data(), static_cast<long>(bytes.size()));
        out.close();
        CHECK_THROWS_AS(read_feature_file(path), IoError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_feature_file(temp_path("wanem_does_not_exist.wfeat")),
                        IoError);
    }
}

TEST_CASE("clip files preserve frame geometry") {
    ClipTensor clip;
    clip.height = 3;
    clip.width = 5;
    clip.num_frames = 2;
    clip.frame_rate_hz = 15.0;
    clip.timestamp_s = 4.0;
    clip.pixels.resize(3 * 5 * 2);
    Rng rng(5);
    for (auto& p : clip.pixels)
        p = static_cast<double>(static_cast<float>(rng.uniform01()));

    const std::string path = temp_path("wanem_clip.wclip");
    write_clip_file(clip, path, 99);
    const auto loaded = read_clip_file(path, 15.0, 4.0);
    CHECK(loaded.height == 3);
    CHECK(loaded.width == 5);
    CHECK(loaded.num_frames == 2);
    CHECK(loaded.pixels == clip.pixels);

    CHECK(probe_file_kind(path) == FileKind::clip);
}

TEST_CASE("clip validation rejects out-of-range pixels and bad shapes") {
    ClipTensor clip;
    clip.height = 2;
    clip.width = 2;
    clip.num_frames = 2;
    clip.frame_rate_hz = 15.0;
    clip.pixels.assign(8, 0.5);
    CHECK_NOTHROW(clip.validate());
    clip.pixels[3] = 1.5;
    CHECK_THROWS_AS(clip.validate(), ValidationError);
    clip.pixels[3] = 0.5;
    clip.num_frames = 1;
    CHECK_THROWS_AS(clip.validate(), ValidationError);
}

TEST_CASE("manifest load accepts valid rows and rejects bad ones") {
    const std::string path = temp_path("wanem_manifest.csv");

    SUBCASE("three valid rows") {
        std::ofstream out(path);
        out << "clip_id,path,label_mps,timestamp_s,source_tag\n"
            << "a,/x/a.wclip,1.5,0,synthetic\n"
            << "b,/x/b.wclip,2,2,train_flag\n"
            << "c,/x/c.wclip,0,4,tunnel\n";
        out.close();
        const auto m = load_manifest(path);
        CHECK(m.n() == 3);
        CHECK(m.records[1].label_mps == 2.0);
        CHECK(m.records[2].source_tag == SourceTag::tunnel);
    }
    SUBCASE("negative label") {
        std::ofstream out(path);
        out << "clip_id,path,label_mps,timestamp_s,source_tag\n"
            << "a,/x/a.wclip,-1.0,0,synthetic\n";
        out.close();
        CHECK_THROWS_WITH_AS(load_manifest(path), "negative label at line 2",
                             ValidationError);
    }
    SUBCASE("duplicate clip_id") {
        std::ofstream out(path);
        out << "clip_id,path,label_mps,timestamp_s,source_tag\n"
            << "a,/x/a.wclip,1,0,synthetic\n"
            << "a,/x/b.wclip,2,2,synthetic\n";
        out.close();
        CHECK_THROWS_WITH_AS(load_manifest(path), "duplicate clip_id: a",
                             ValidationError);
    }
    SUBCASE("malformed row") {
        std::ofstream out(path);
        out << "clip_id,path,label_mps,timestamp_s,source_tag\n"
            << "a,/x/a.wclip,not_a_number,0,synthetic\n";
        out.close();
        CHECK_THROWS_AS(load_manifest(path), ValidationError);
    }
    SUBCASE("wrong header") {
        std::ofstream out(path);
        out << "id,path,label\n";
        out.close();
        CHECK_THROWS_AS(load_manifest(path), ValidationError);
    }
}

TEST_CASE("manifest save/load round trip") {
    DatasetManifest manifest;
    manifest.records.push_back({"c1", "/d/c1.wfeat", 3.25, 0.0, SourceTag::synthetic});
    manifest.records.push_back({"c2", "/d/c2.wfeat", 0.1, 2.0, SourceTag::adjacent_flag});
    const std::string path = temp_path("wanem_manifest_rt.csv");
    save_manifest(manifest, path);
    const auto loaded = load_manifest(path);
    REQUIRE(loaded.n() == 2);
    CHECK(loaded.records[0].clip_id == "c1");
    CHECK(loaded.records[0].label_mps == 3.25);
    CHECK(loaded.records[1].source_tag == SourceTag::adjacent_flag);
    CHECK(loaded.records[1].timestamp_s == 2.0);
}

TEST_CASE("format_double emits shortest round-trip form") {
    CHECK(format_double(0.75) == "0.75");
    CHECK(format_double(11.25) == "11.25");
    CHECK(format_double(3.0) == "3");
    CHECK(format_double(0.37 / 2.0) == "0.185");
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const double v = rng.uniform(-1e6, 1e6);
        CHECK(parse_double(format_double(v)) == v);
    }
}

TEST_CASE("parse helpers are strict") {
    CHECK_THROWS_AS(parse_double("1.5x"), ValidationError);
    CHECK_THROWS_AS(parse_double(""), ValidationError);
    CHECK_THROWS_AS(parse_long("12.5"), ValidationError);
    CHECK(parse_long("-3") == -3);
}

TEST_CASE("source tags round trip through strings") {
    for (auto tag : {SourceTag::train_flag, SourceTag::train_tree,
                     SourceTag::adjacent_flag, SourceTag::tunnel, SourceTag::synthetic})
        CHECK(source_tag_from_string(to_string(tag)) == tag);
    CHECK_THROWS_AS(source_tag_from_string("nope"), ValidationError);
}
