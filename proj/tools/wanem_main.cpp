// wanem command-line tool: synthetic dataset generation, feature extraction,
// balancing, training, evaluation and the physics calculators, wired into
// reproducible pipelines. Every command is deterministic under a fixed seed.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 divergence.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "wanem/core.hpp"
#include "wanem/eval.hpp"
#include "wanem/features.hpp"
#include "wanem/flagsim.hpp"
#include "wanem/lstm.hpp"
#include "wanem/parallel.hpp"
#include "wanem/physics.hpp"
#include "wanem/train.hpp"

namespace {

using namespace wanem;

// ---------------------------------------------------------------------------
// Configuration: CLI flag > config file ("key = value" lines) > default.
// `wanem config dump` echoes the effective configuration in a canonical form
// that re-parses to the same bytes.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    // paths
    std::string out_dir = "out";
    std::string manifest;
    std::string checkpoint = "model.wanemw";
    std::string log_path;                 // default: <out_dir>/train_log.csv
    std::string out_path;                 // command-specific output (balance/predict/sigma)

    // physical setup
    double flag_length_m = 1.5;
    double frame_rate_hz = 15.0;
    double clip_duration_s = 2.0;
    int frame_height_px = 32;
    int frame_width_px = 32;

    // rendering
    double amplitude_px = 10.0;
    int wave_mode = 1;
    double background_level = 0.2;
    double background_drift_per_s = 0.0;
    double band_halfwidth_px = 2.0;

    // generation
    std::string speeds = "1:10:1";
    int clips_per_speed = 20;
    double intensity = 0.15;
    double label_window_s = 60.0;
    std::string label_window_mode = "centered";   // centered|leading|trailing
    double series_duration_s = 0.0;               // 0 = clips_per_speed * T
    std::string gen_format = "clips";             // clips|features

    // extractor
    int patch_px = 4;
    std::string stats = "mean,std,max,diff";
    bool relu_clamp = true;
    int pool_filter = 3;
    int pool_stride = 2;

    // network
    int num_layers = 2;
    int hidden_size = 64;
    bool paper_size = false;    // 2 layers x 1000 hidden, batch 256
    bool no_bias = false;

    // training
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 32;
    int max_epochs = 20;
    int early_stop_patience = 3;
    double balance_bin_mps = 0.25;
    int balance_cap = 0;        // 0 = no balancing
    double train_fraction = 0.76;
    std::string variant = "nm";

    // evaluation
    std::string bounds = "paper";   // paper|exact|none
    double report_bin_mps = 1.0;

    // misc
    uint64_t seed = 0;
    int threads = 1;
};

std::string bool_str(bool v) { return v ? "true" : "false"; }

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ValidationError("malformed boolean: " + s);
}

// Key list shared by the config-file reader and `config dump`; order here is
// the canonical dump order.
void for_each_key(ExperimentConfig& cfg,
                  const std::function<void(const std::string&, std::function<std::string()>,
                                           std::function<void(const std::string&)>)>& fn) {
    auto str_field = [&](const char* key, std::string& field) {
        fn(key, [&field] { return field; }, [&field](const std::string& v) { field = v; });
    };
    auto dbl_field = [&](const char* key, double& field) {
        fn(key, [&field] { return format_double(field); },
           [&field](const std::string& v) { field = parse_double(v); });
    };
    auto int_field = [&](const char* key, int& field) {
        fn(key, [&field] { return std::to_string(field); },
           [&field](const std::string& v) { field = static_cast<int>(parse_long(v)); });
    };
    auto u64_field = [&](const char* key, uint64_t& field) {
        fn(key, [&field] { return std::to_string(field); },
           [&field](const std::string& v) {
               field = static_cast<uint64_t>(std::stoull(v));
           });
    };
    auto bool_field = [&](const char* key, bool& field) {
        fn(key, [&field] { return bool_str(field); },
           [&field](const std::string& v) { field = parse_bool(v); });
    };

    str_field("out_dir", cfg.out_dir);
    str_field("manifest", cfg.manifest);
    str_field("checkpoint", cfg.checkpoint);
    str_field("log_path", cfg.log_path);
    str_field("out_path", cfg.out_path);
    dbl_field("flag_length_m", cfg.flag_length_m);
    dbl_field("frame_rate_hz", cfg.frame_rate_hz);
    dbl_field("clip_duration_s", cfg.clip_duration_s);
    int_field("frame_height_px", cfg.frame_height_px);
    int_field("frame_width_px", cfg.frame_width_px);
    dbl_field("amplitude_px", cfg.amplitude_px);
    int_field("wave_mode", cfg.wave_mode);
    dbl_field("background_level", cfg.background_level);
    dbl_field("background_drift_per_s", cfg.background_drift_per_s);
    dbl_field("band_halfwidth_px", cfg.band_halfwidth_px);
    str_field("speeds", cfg.speeds);
    int_field("clips_per_speed", cfg.clips_per_speed);
    dbl_field("intensity", cfg.intensity);
    dbl_field("label_window_s", cfg.label_window_s);
    str_field("label_window_mode", cfg.label_window_mode);
    dbl_field("series_duration_s", cfg.series_duration_s);
    str_field("gen_format", cfg.gen_format);
    int_field("patch_px", cfg.patch_px);
    str_field("stats", cfg.stats);
    bool_field("relu_clamp", cfg.relu_clamp);
    int_field("pool_filter", cfg.pool_filter);
    int_field("pool_stride", cfg.pool_stride);
    int_field("num_layers", cfg.num_layers);
    int_field("hidden_size", cfg.hidden_size);
    bool_field("paper_size", cfg.paper_size);
    bool_field("no_bias", cfg.no_bias);
    dbl_field("learning_rate", cfg.learning_rate);
    dbl_field("momentum", cfg.momentum);
    int_field("batch_size", cfg.batch_size);
    int_field("max_epochs", cfg.max_epochs);
    int_field("early_stop_patience", cfg.early_stop_patience);
    dbl_field("balance_bin_mps", cfg.balance_bin_mps);
    int_field("balance_cap", cfg.balance_cap);
    dbl_field("train_fraction", cfg.train_fraction);
    str_field("variant", cfg.variant);
    str_field("bounds", cfg.bounds);
    dbl_field("report_bin_mps", cfg.report_bin_mps);
    u64_field("seed", cfg.seed);
    int_field("threads", cfg.threads);
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::map<std::string, std::string> values;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  " is not key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    std::set<std::string> known;
    for_each_key(cfg, [&](const std::string& key, auto, auto setter) {
        known.insert(key);
        auto it = values.find(key);
        if (it != values.end()) setter(it->second);
    });
    for (const auto& [key, value] : values)
        if (!known.count(key))
            throw ValidationError("unknown config key: " + key);
}

std::string dump_config(ExperimentConfig& cfg) {
    std::ostringstream out;
    for_each_key(cfg, [&](const std::string& key, auto getter, auto) {
        out << key << " = " << getter() << '\n';
    });
    return out.str();
}

// ---------------------------------------------------------------------------
// Helpers binding the flat config onto module types
// ---------------------------------------------------------------------------

flagsim::PhysicalSetup setup_from(const ExperimentConfig& cfg) {
    flagsim::PhysicalSetup setup;
    setup.flag_length_m = cfg.flag_length_m;
    setup.frame_rate_hz = cfg.frame_rate_hz;
    setup.clip_duration_s = cfg.clip_duration_s;
    setup.frame_height_px = cfg.frame_height_px;
    setup.frame_width_px = cfg.frame_width_px;
    return setup;
}

flagsim::FlagRenderSpec render_from(const ExperimentConfig& cfg) {
    flagsim::FlagRenderSpec spec;
    spec.amplitude_px = cfg.amplitude_px;
    spec.wave_mode = cfg.wave_mode;
    spec.background_level = cfg.background_level;
    spec.background_drift_per_s = cfg.background_drift_per_s;
    spec.band_halfwidth_px = cfg.band_halfwidth_px;
    return spec;
}

features::ExtractorSpec extractor_from(const ExperimentConfig& cfg) {
    features::ExtractorSpec spec;
    spec.patch_px = cfg.patch_px;
    spec.relu_clamp = cfg.relu_clamp;
    spec.pool_filter = cfg.pool_filter;
    spec.pool_stride = cfg.pool_stride;
    spec.stat_mean = spec.stat_std = spec.stat_max = spec.stat_frame_diff = false;
    std::stringstream ss(cfg.stats);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "mean") spec.stat_mean = true;
        else if (item == "std") spec.stat_std = true;
        else if (item == "max") spec.stat_max = true;
        else if (item == "diff") spec.stat_frame_diff = true;
        else throw ValidationError("unknown statistic: " + item);
    }
    return spec;
}

train::TrainConfig train_config_from(const ExperimentConfig& cfg) {
    train::TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.momentum = cfg.momentum;
    tc.batch_size = cfg.paper_size ? 256 : cfg.batch_size;
    tc.max_epochs = cfg.max_epochs;
    tc.early_stop_patience = cfg.early_stop_patience;
    tc.balance_bin_mps = cfg.balance_bin_mps;
    if (cfg.balance_cap > 0) tc.balance_cap = cfg.balance_cap;
    tc.train_fraction = cfg.train_fraction;
    tc.seed = cfg.seed;
    tc.threads = cfg.threads;
    return tc;
}

std::vector<double> parse_speeds(const std::string& text) {
    std::vector<double> speeds;
    if (text.find(':') != std::string::npos) {
        std::stringstream ss(text);
        std::string part;
        std::vector<double> parts;
        while (std::getline(ss, part, ':')) parts.push_back(parse_double(part));
        if (parts.size() != 3 || parts[2] <= 0.0)
            throw ValidationError("speed range must be start:stop:step with step > 0");
        for (double v = parts[0]; v <= parts[1] + 1e-9; v += parts[2])
            speeds.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) speeds.push_back(parse_double(part));
    }
    if (speeds.empty()) throw ValidationError("empty speed list");
    for (double v : speeds)
        if (v < 0.0) throw ValidationError("speeds must be nonnegative");
    return speeds;
}

flagsim::LabelWindowMode window_mode_from(const std::string& s) {
    if (s == "centered") return flagsim::LabelWindowMode::centered;
    if (s == "leading") return flagsim::LabelWindowMode::leading;
    if (s == "trailing") return flagsim::LabelWindowMode::trailing;
    throw ValidationError("unknown label window mode: " + s);
}

std::optional<std::pair<double, double>> bounds_from(const ExperimentConfig& cfg) {
    if (cfg.bounds == "paper")
        return std::make_pair(physics::kFieldRangeLowMps, physics::kFieldRangeHighMps);
    if (cfg.bounds == "exact") {
        const auto range = physics::measurable_range(setup_from(cfg));
        return std::make_pair(range.u_low_mps, range.u_high_mps);
    }
    if (cfg.bounds == "none") return std::nullopt;
    throw ValidationError("bounds must be paper, exact or none");
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_gen(const ExperimentConfig& cfg) {
    flagsim::GenerateOptions opts;
    opts.speeds = parse_speeds(cfg.speeds);
    opts.clips_per_speed = cfg.clips_per_speed;
    opts.intensity = cfg.intensity;
    opts.label_window_s = cfg.label_window_s;
    opts.label_window_mode = window_mode_from(cfg.label_window_mode);
    opts.series_duration_s = cfg.series_duration_s;
    opts.threads = cfg.threads;
    if (cfg.intensity > 1.0) throw ValidationError("intensity must be <= 1");

    flagsim::ClipWriter writer = flagsim::default_clip_writer();
    if (cfg.gen_format == "features") {
        const auto spec = extractor_from(cfg);
        writer = [spec](const ClipTensor& clip, const std::string& clip_id,
                        const std::string& out_dir) {
            const auto seq = features::extract(clip, spec);
            const std::string name = clip_id + ".wfeat";
            write_feature_file(seq, out_dir + "/" + name, fnv1a64(clip_id));
            return name;
        };
    } else if (cfg.gen_format != "clips") {
        throw ValidationError("gen format must be clips or features");
    }

    Rng rng(cfg.seed);
    const auto manifest = flagsim::generate_dataset(opts, setup_from(cfg),
                                                    render_from(cfg), rng,
                                                    cfg.out_dir, writer);
    std::cout << "generated " << manifest.n() << " clips in " << cfg.out_dir
              << " (manifest " << cfg.out_dir << "/manifest.csv)\n";
    return 0;
}

int cmd_extract(const ExperimentConfig& cfg) {
    if (cfg.manifest.empty()) throw ValidationError("--manifest is required");
    const auto manifest = load_manifest(cfg.manifest);
    const auto spec = extractor_from(cfg);

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);

    DatasetManifest out = manifest;
    parallel_for(out.records.size(), cfg.threads, [&](size_t k) {
        auto& rec = out.records[k];
        const ClipTensor clip =
            read_clip_file(rec.path, cfg.frame_rate_hz, rec.timestamp_s);
        const auto seq = features::extract(clip, spec);
        rec.path = rec.clip_id + ".wfeat";
        write_feature_file(seq, cfg.out_dir + "/" + rec.path, fnv1a64(rec.clip_id));
    });
    save_manifest(out, cfg.out_dir + "/manifest.csv");
    std::cout << "extracted features for " << out.n() << " clips into " << cfg.out_dir
              << "\n";
    return 0;
}

int cmd_balance(const ExperimentConfig& cfg) {
    if (cfg.manifest.empty()) throw ValidationError("--manifest is required");
    if (cfg.balance_cap < 1) throw ValidationError("--cap must be positive");
    const auto manifest = load_manifest(cfg.manifest);
    Rng rng(cfg.seed);
    auto balanced =
        train::balance_dataset(manifest, cfg.balance_bin_mps, cfg.balance_cap, rng);
    // the balanced manifest can land anywhere, so pin the data files down
    for (auto& rec : balanced.records)
        rec.path = std::filesystem::absolute(rec.path).string();
    const std::string out =
        cfg.out_path.empty() ? cfg.out_dir + "/balanced.csv" : cfg.out_path;
    const auto parent = std::filesystem::path(out).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
        if (ec) throw IoError("cannot create output directory: " + parent.string());
    }
    save_manifest(balanced, out);
    std::cout << "balanced " << manifest.n() << " -> " << balanced.n()
              << " records (" << out << ")\n";
    return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
    if (cfg.manifest.empty()) throw ValidationError("--manifest is required");
    auto manifest = load_manifest(cfg.manifest);
    if (manifest.n() < 2) throw ValidationError("manifest too small to train on");

    const auto tc = train_config_from(cfg);
    Rng rng(cfg.seed);
    if (tc.balance_cap) {
        Rng balance_rng = rng.fork(0);
        manifest = train::balance_dataset(manifest, tc.balance_bin_mps,
                                          *tc.balance_cap, balance_rng);
    }
    Rng split_rng = rng.fork(1);
    auto [train_manifest, val_manifest] =
        train::split_manifest(manifest, tc.train_fraction, split_rng);

    const auto spec = extractor_from(cfg);
    const auto variant = features::variant_from_string(cfg.variant);
    const auto train_samples = features::prepare_inputs(
        train_manifest, spec, variant, cfg.frame_rate_hz, cfg.threads);
    const auto val_samples = features::prepare_inputs(
        val_manifest, spec, variant, cfg.frame_rate_hz, cfg.threads);

    lstm::NetworkConfig net_cfg;
    net_cfg.num_layers = cfg.paper_size ? 2 : cfg.num_layers;
    net_cfg.hidden = cfg.paper_size ? 1000 : cfg.hidden_size;
    net_cfg.feature_dim = train_samples.front().features.num_features;
    net_cfg.bias = !cfg.no_bias;
    Rng init_rng = rng.fork(2);
    lstm::Network net = lstm::Network::init(net_cfg, init_rng);
    net.nm_inputs = variant == features::Variant::nm;

    const auto result = train::fit(
        std::move(net), train_samples, val_samples, tc,
        [&tc](const train::EpochStats& e) {
            std::cerr << "epoch " << e.epoch << "/" << tc.max_epochs << " train_mse "
                      << format_double(e.train_mse) << " val_rmse "
                      << format_double(e.val_rmse) << " (" << format_double(e.seconds)
                      << " s)\n";
        });

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
    const std::string log =
        cfg.log_path.empty() ? cfg.out_dir + "/train_log.csv" : cfg.log_path;
    lstm::save_checkpoint(result.best, cfg.checkpoint);
    train::write_history_csv(result.history, log);

    std::cout << "trained " << result.history.size() << " epochs; best epoch "
              << result.best_epoch << " val_rmse "
              << format_double(result.history[result.best_epoch - 1].val_rmse)
              << "; checkpoint " << cfg.checkpoint << "; log " << log << "\n";
    return 0;
}

std::vector<train::EvalRecord> predictions_for_manifest(const ExperimentConfig& cfg,
                                                        const lstm::Network& net) {
    const auto manifest = load_manifest(cfg.manifest);
    const auto spec = extractor_from(cfg);
    const auto variant =
        net.nm_inputs ? features::Variant::nm : features::Variant::raw;
    const auto samples = features::prepare_inputs(manifest, spec, variant,
                                                  cfg.frame_rate_hz, cfg.threads);
    return train::predict(net, samples);
}

int cmd_eval(const ExperimentConfig& cfg) {
    if (cfg.manifest.empty()) throw ValidationError("--manifest is required");
    const auto net = lstm::load_checkpoint(cfg.checkpoint);
    const auto records = predictions_for_manifest(cfg, net);
    const auto bounds = bounds_from(cfg);
    const std::string variant_name = net.nm_inputs ? "nm" : "raw";

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);

    const auto rows = eval::summarize_by_tag(records, variant_name, bounds);
    eval::write_summary_csv(rows, cfg.out_dir + "/summary.csv");
    const auto report = eval::binned_report(records, cfg.report_bin_mps);
    eval::write_binned_csv(report, cfg.out_dir + "/binned.csv");
    eval::write_predictions_csv(records, cfg.out_dir + "/predictions.csv");

    const auto overall = eval::rmse(records, bounds);
    std::cout << "evaluated " << records.size() << " clips: overall_rmse "
              << format_double(overall.overall_rmse_mps);
    if (overall.bounded)
        std::cout << ", measurable_rmse " << format_double(overall.measurable_rmse_mps)
                  << " (" << overall.n_measurable << "/" << overall.n_overall
                  << " in [" << format_double(overall.bound_low_mps) << ", "
                  << format_double(overall.bound_high_mps) << "])";
    std::cout << "; reports in " << cfg.out_dir << "\n";
    return 0;
}

int cmd_predict(const ExperimentConfig& cfg) {
    if (cfg.manifest.empty()) throw ValidationError("--manifest is required");
    const auto net = lstm::load_checkpoint(cfg.checkpoint);
    const auto records = predictions_for_manifest(cfg, net);
    if (cfg.out_path.empty()) {
        std::cout << "clip_id,label_mps,prediction_mps,source_tag\n";
        for (const auto& r : records)
            std::cout << r.clip_id << ',' << format_double(r.y) << ','
                      << format_double(r.y_hat) << ',' << to_string(r.source_tag)
                      << '\n';
    } else {
        eval::write_predictions_csv(records, cfg.out_path);
        std::cout << "wrote " << records.size() << " predictions to " << cfg.out_path
                  << "\n";
    }
    return 0;
}

int cmd_limits(const ExperimentConfig& cfg) {
    const auto range = physics::measurable_range(setup_from(cfg));
    std::cout << format_double(range.u_low_mps) << " .. "
              << format_double(range.u_high_mps) << " (nyquist "
              << format_double(range.f_nyquist_hz) << " Hz)\n";
    return 0;
}

int cmd_sigma(const ExperimentConfig& cfg) {
    const auto speeds = parse_speeds(cfg.speeds);
    const auto setup = setup_from(cfg);
    const double duration =
        cfg.series_duration_s > 0.0 ? cfg.series_duration_s : 600.0;

    Rng rng(cfg.seed);
    std::vector<flagsim::WindSeries> series;
    for (size_t k = 0; k < speeds.size(); ++k) {
        Rng series_rng = rng.fork(k);
        auto s = flagsim::synthesize_wind_series(speeds[k], cfg.intensity, setup,
                                                 series_rng, duration);
        s.averaging_window_s = cfg.label_window_s;
        series.push_back(std::move(s));
    }
    const auto stats =
        physics::sigma_u_band(series, 0.5, cfg.clip_duration_s);

    const std::string out =
        cfg.out_path.empty() ? cfg.out_dir + "/sigma.csv" : cfg.out_path;
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    physics::write_sigma_csv(stats, out);
    std::cout << "sigma_u over " << stats.bin_centers_mps.size() << " bins -> " << out
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    ExperimentConfig cfg;

    // --config is applied before CLI parsing so explicit flags win
    for (int k = 1; k + 1 < argc; ++k)
        if (std::string(argv[k]) == "--config") {
            try {
                apply_config_file(cfg, argv[k + 1]);
            } catch (const ValidationError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            } catch (const IoError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 3;
            }
        }

    CLI::App app{"wanem: wind speed estimation from flapping-flag video features"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file")
        ->expected(1);

    auto add_setup = [&](CLI::App* cmd) {
        cmd->add_option("--flag-length", cfg.flag_length_m, "flag length L in m");
        cmd->add_option("--fps", cfg.frame_rate_hz, "frame rate f_s in Hz");
        cmd->add_option("--duration", cfg.clip_duration_s, "clip duration T in s");
        cmd->add_option("--height", cfg.frame_height_px, "frame height px");
        cmd->add_option("--width", cfg.frame_width_px, "frame width px");
    };
    auto add_extractor = [&](CLI::App* cmd) {
        cmd->add_option("--patch", cfg.patch_px, "patch size in px");
        cmd->add_option("--stats", cfg.stats, "statistics: mean,std,max,diff");
        cmd->add_flag("--relu,!--no-relu", cfg.relu_clamp, "clamp statistics at zero");
        cmd->add_option("--pool-filter", cfg.pool_filter, "max-pool filter");
        cmd->add_option("--pool-stride", cfg.pool_stride, "max-pool stride");
    };
    auto add_threads = [&](CLI::App* cmd) {
        cmd->add_option("--threads", cfg.threads, "worker thread cap");
    };

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic clip dataset");
    gen->add_option("--speeds", cfg.speeds, "mean speeds, list or start:stop:step");
    gen->add_option("--clips-per-speed", cfg.clips_per_speed, "clips per mean speed");
    gen->add_option("--intensity", cfg.intensity, "turbulence intensity sigma_u/U");
    gen->add_option("--label-window", cfg.label_window_s, "label averaging window s");
    gen->add_option("--label-window-mode", cfg.label_window_mode,
                    "centered|leading|trailing");
    gen->add_option("--series-duration", cfg.series_duration_s,
                    "wind series length per speed, s");
    gen->add_option("--format", cfg.gen_format, "clips|features");
    gen->add_option("--amplitude", cfg.amplitude_px, "flag amplitude px");
    gen->add_option("--wave-mode", cfg.wave_mode, "spatial wave mode");
    gen->add_option("--background", cfg.background_level, "background level [0,1]");
    gen->add_option("--drift", cfg.background_drift_per_s, "background drift per s");
    gen->add_option("--out", cfg.out_dir, "output directory");
    gen->add_option("--seed", cfg.seed, "rng seed")->required();
    add_setup(gen);
    add_extractor(gen);
    add_threads(gen);

    // extract
    auto* extract = app.add_subcommand("extract", "convert clip files to feature files");
    extract->add_option("--manifest", cfg.manifest, "input manifest")->required();
    extract->add_option("--out", cfg.out_dir, "output directory");
    add_setup(extract);
    add_extractor(extract);
    add_threads(extract);

    // balance
    auto* balance = app.add_subcommand("balance", "down-sample over-represented label bins");
    balance->add_option("--manifest", cfg.manifest, "input manifest")->required();
    balance->add_option("--bin", cfg.balance_bin_mps, "label bin width m/s");
    balance->add_option("--cap", cfg.balance_cap, "max records per bin")->required();
    balance->add_option("--out", cfg.out_path, "output manifest path");
    balance->add_option("--out-dir", cfg.out_dir, "output directory");
    balance->add_option("--seed", cfg.seed, "rng seed");

    // train
    auto* tr = app.add_subcommand("train", "train the regressor on a manifest");
    tr->add_option("--manifest", cfg.manifest, "input manifest")->required();
    tr->add_option("--checkpoint", cfg.checkpoint, "checkpoint output path");
    tr->add_option("--log", cfg.log_path, "training log CSV path");
    tr->add_option("--out", cfg.out_dir, "output directory");
    tr->add_option("--variant", cfg.variant, "nm|raw input variant");
    tr->add_option("--lr", cfg.learning_rate, "learning rate");
    tr->add_option("--momentum", cfg.momentum, "momentum");
    tr->add_option("--batch", cfg.batch_size, "minibatch size");
    tr->add_option("--epochs", cfg.max_epochs, "max epochs");
    tr->add_option("--patience", cfg.early_stop_patience, "early stop patience");
    tr->add_option("--balance-bin", cfg.balance_bin_mps, "balance bin width m/s");
    tr->add_option("--balance-cap", cfg.balance_cap, "balance cap, 0 = off");
    tr->add_option("--train-fraction", cfg.train_fraction, "train split fraction");
    tr->add_option("--layers", cfg.num_layers, "LSTM layers");
    tr->add_option("--hidden", cfg.hidden_size, "hidden units per layer");
    tr->add_flag("--paper-size", cfg.paper_size, "2x1000 hidden, batch 256");
    tr->add_flag("--no-bias", cfg.no_bias, "disable gate bias vector");
    tr->add_option("--seed", cfg.seed, "rng seed")->required();
    add_setup(tr);
    add_extractor(tr);
    add_threads(tr);

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a manifest");
    ev->add_option("--manifest", cfg.manifest, "input manifest")->required();
    ev->add_option("--checkpoint", cfg.checkpoint, "checkpoint path");
    ev->add_option("--out", cfg.out_dir, "report output directory");
    ev->add_option("--bounds", cfg.bounds, "paper|exact|none measurable bounds");
    ev->add_option("--report-bin", cfg.report_bin_mps, "report bin width m/s");
    add_setup(ev);
    add_extractor(ev);
    add_threads(ev);

    // predict
    auto* pr = app.add_subcommand("predict", "print predictions for a manifest");
    pr->add_option("--manifest", cfg.manifest, "input manifest")->required();
    pr->add_option("--checkpoint", cfg.checkpoint, "checkpoint path");
    pr->add_option("--out", cfg.out_path, "output CSV (stdout if omitted)");
    add_setup(pr);
    add_extractor(pr);
    add_threads(pr);

    // limits
    auto* lim = app.add_subcommand("limits", "print the measurable wind speed range");
    add_setup(lim);

    // sigma
    auto* sg = app.add_subcommand("sigma", "turbulence variability band from synthetic series");
    sg->add_option("--speeds", cfg.speeds, "mean speeds, list or start:stop:step");
    sg->add_option("--intensity", cfg.intensity, "turbulence intensity");
    sg->add_option("--series-duration", cfg.series_duration_s, "series length s");
    sg->add_option("--label-window", cfg.label_window_s, "averaging window s");
    sg->add_option("--out", cfg.out_path, "output CSV path");
    sg->add_option("--out-dir", cfg.out_dir, "output directory");
    sg->add_option("--seed", cfg.seed, "rng seed");
    add_setup(sg);

    // config dump
    auto* config_cmd = app.add_subcommand("config", "configuration utilities");
    auto* dump = config_cmd->add_subcommand("dump", "print the effective configuration");
    config_cmd->require_subcommand(1);

    // --config may follow the subcommand name
    for (CLI::App* sub : {gen, extract, balance, tr, ev, pr, lim, sg, config_cmd, dump})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(cfg);
        if (extract->parsed()) return cmd_extract(cfg);
        if (balance->parsed()) return cmd_balance(cfg);
        if (tr->parsed()) return cmd_train(cfg);
        if (ev->parsed()) return cmd_eval(cfg);
        if (pr->parsed()) return cmd_predict(cfg);
        if (lim->parsed()) return cmd_limits(cfg);
        if (sg->parsed()) return cmd_sigma(cfg);
        if (dump->parsed()) {
            std::cout << dump_config(cfg);
            return 0;
        }
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
