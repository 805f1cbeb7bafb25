#include "wanem/lstm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace wanem::lstm {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Layout Layout::make(const NetworkConfig& cfg) {
    if (cfg.num_layers < 1) throw ValidationError("network needs at least one layer");
    if (cfg.hidden < 1) throw ValidationError("hidden size must be positive");
    if (cfg.feature_dim < 1) throw ValidationError("feature dimension must be positive");
    Layout layout;
    layout.cfg = cfg;
    size_t off = 0;
    for (int l = 0; l < cfg.num_layers; ++l) {
        const size_t rows = 4 * static_cast<size_t>(cfg.hidden);
        const size_t cols = cfg.hidden + layout.layer_input(l);
        layout.w_off.push_back(off);
        off += rows * cols;
        layout.b_off.push_back(off);
        off += rows;
    }
    layout.head_w_off = off;
    off += cfg.hidden;
    layout.head_b_off = off;
    off += 1;
    layout.total = off;
    return layout;
}

void cell_step(const LayerParams& params, LayerState& state, std::span<const double> x) {
    const int h_size = params.hidden;
    const int in_size = params.input;
    if (static_cast<int>(x.size()) != in_size)
        throw ValidationError("cell input dimension mismatch");
    if (static_cast<int>(state.h.size()) != h_size ||
        static_cast<int>(state.c.size()) != h_size)
        throw ValidationError("cell state dimension mismatch");
    for (double v : x)
        if (!std::isfinite(v)) throw ValidationError("non-finite cell input");
    for (double v : params.w)
        if (!std::isfinite(v)) throw ValidationError("non-finite parameter");
    for (double v : params.b)
        if (!std::isfinite(v)) throw ValidationError("non-finite parameter");

    const int cols = h_size + in_size;
    std::vector<double> h_new(h_size), c_new(h_size);
    for (int row_h = 0; row_h < h_size; ++row_h) {
        std::array<double, 4> z;
        for (int gate = 0; gate < 4; ++gate) {
            const double* w_row = params.w.data() + (gate * h_size + row_h) * cols;
            double acc = params.b[gate * h_size + row_h];
            for (int j = 0; j < h_size; ++j) acc += w_row[j] * state.h[j];
            for (int j = 0; j < in_size; ++j) acc += w_row[h_size + j] * x[j];
            z[gate] = acc;
        }
        const double gi = sigmoid(z[0]);
        const double gf = sigmoid(z[1]);
        const double go = sigmoid(z[2]);
        const double gg = std::tanh(z[3]);
        c_new[row_h] = gf * state.c[row_h] + gi * gg;
        h_new[row_h] = go * std::tanh(c_new[row_h]);
    }
    state.h = std::move(h_new);
    state.c = std::move(c_new);
}

Network Network::zeros(const NetworkConfig& cfg) {
    Network net;
    net.cfg_ = cfg;
    net.layout_ = Layout::make(cfg);
    net.params_.assign(net.layout_.total, 0.0);
    return net;
}

Network Network::init(const NetworkConfig& cfg, Rng& rng) {
    Network net = zeros(cfg);
    const Layout& layout = net.layout_;
    for (int l = 0; l < cfg.num_layers; ++l) {
        const int cols = cfg.hidden + layout.layer_input(l);
        const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
        double* w = net.params_.data() + layout.w_off[l];
        const size_t count = 4 * static_cast<size_t>(cfg.hidden) * cols;
        for (size_t k = 0; k < count; ++k) w[k] = rng.uniform(-bound, bound);
        if (cfg.bias) {
            // forget-gate block starts open so early gradients flow
            double* b = net.params_.data() + layout.b_off[l];
            for (int k = 0; k < cfg.hidden; ++k) b[cfg.hidden + k] = 1.0;
        }
    }
    const double head_bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
    double* head = net.params_.data() + layout.head_w_off;
    for (int k = 0; k < cfg.hidden; ++k) head[k] = rng.uniform(-head_bound, head_bound);
    return net;
}

LayerParams Network::layer(int l) const {
    const int cols = cfg_.hidden + layout_.layer_input(l);
    return LayerParams{
        cfg_.hidden, layout_.layer_input(l),
        std::span<const double>(params_.data() + layout_.w_off[l],
                                4 * static_cast<size_t>(cfg_.hidden) * cols),
        std::span<const double>(params_.data() + layout_.b_off[l],
                                4 * static_cast<size_t>(cfg_.hidden))};
}

std::span<const double> Network::head_w() const {
    return std::span<const double>(params_.data() + layout_.head_w_off, cfg_.hidden);
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

double forward(const Network& net, const FeatureSequence& seq, ForwardCache* cache) {
    const NetworkConfig& cfg = net.config();
    if (seq.num_features != cfg.feature_dim)
        throw ValidationError("feature dimension does not match network input");
    if (seq.num_frames < 1) throw ValidationError("empty feature sequence");
    for (double v : seq.values)
        if (!std::isfinite(v)) throw ValidationError("non-finite feature input");

    const int frames = seq.num_frames;
    const int h_size = cfg.hidden;
    const size_t state_count = static_cast<size_t>(frames) * h_size;

    if (cache) {
        cache->net = &net;
        cache->frames = frames;
        cache->layers.assign(cfg.num_layers, {});
        for (int l = 0; l < cfg.num_layers; ++l) {
            auto& lc = cache->layers[l];
            lc.x.resize(static_cast<size_t>(frames) * net.layout().layer_input(l));
            lc.h_prev.resize(state_count);
            lc.c_prev.resize(state_count);
            lc.i.resize(state_count);
            lc.f.resize(state_count);
            lc.o.resize(state_count);
            lc.g.resize(state_count);
            lc.c.resize(state_count);
            lc.tanh_c.resize(state_count);
        }
    }

    std::vector<std::vector<double>> h(cfg.num_layers, std::vector<double>(h_size, 0.0));
    std::vector<std::vector<double>> c(cfg.num_layers, std::vector<double>(h_size, 0.0));
    std::vector<double> z(4 * static_cast<size_t>(h_size));

    for (int t = 0; t < frames; ++t) {
        const double* x = seq.values.data() + static_cast<size_t>(t) * cfg.feature_dim;
        int in_size = cfg.feature_dim;
        for (int l = 0; l < cfg.num_layers; ++l) {
            const LayerParams params = net.layer(l);
            const int cols = h_size + in_size;
            auto* lc = cache ? &cache->layers[l] : nullptr;
            if (lc) {
                std::memcpy(lc->x.data() + static_cast<size_t>(t) * in_size, x,
                            sizeof(double) * in_size);
                std::memcpy(lc->h_prev.data() + static_cast<size_t>(t) * h_size,
                            h[l].data(), sizeof(double) * h_size);
                std::memcpy(lc->c_prev.data() + static_cast<size_t>(t) * h_size,
                            c[l].data(), sizeof(double) * h_size);
            }
            for (int row = 0; row < 4 * h_size; ++row) {
                const double* w_row = params.w.data() + static_cast<size_t>(row) * cols;
                double acc = params.b[row];
                const double* hl = h[l].data();
                for (int j = 0; j < h_size; ++j) acc += w_row[j] * hl[j];
                const double* wx = w_row + h_size;
                for (int j = 0; j < in_size; ++j) acc += wx[j] * x[j];
                z[row] = acc;
            }
            for (int k = 0; k < h_size; ++k) {
                const double gi = sigmoid(z[k]);
                const double gf = sigmoid(z[h_size + k]);
                const double go = sigmoid(z[2 * h_size + k]);
                const double gg = std::tanh(z[3 * h_size + k]);
                const double c_new = gf * c[l][k] + gi * gg;
                const double tc = std::tanh(c_new);
                c[l][k] = c_new;
                h[l][k] = go * tc;
                if (lc) {
                    const size_t at = static_cast<size_t>(t) * h_size + k;
                    lc->i[at] = gi;
                    lc->f[at] = gf;
                    lc->o[at] = go;
                    lc->g[at] = gg;
                    lc->c[at] = c_new;
                    lc->tanh_c[at] = tc;
                }
            }
            x = h[l].data();
            in_size = h_size;
        }
    }

    double prediction = net.head_b();
    const auto head = net.head_w();
    const auto& h_last = h[cfg.num_layers - 1];
    for (int k = 0; k < h_size; ++k) prediction += head[k] * h_last[k];

    if (cache) {
        cache->final_h = h_last;
        cache->prediction = prediction;
    }
    return prediction;
}

// ---------------------------------------------------------------------------
// Backward (reverse-mode through the gate equations, layers top-down,
// time reversed)
// ---------------------------------------------------------------------------

void backward_into(const Network& net, const ForwardCache& cache,
                   double d_prediction, std::span<double> grads) {
    if (cache.net != &net || static_cast<int>(cache.layers.size()) != net.config().num_layers)
        throw ValidationError("forward cache does not match network");
    if (grads.size() != net.num_params())
        throw ValidationError("gradient buffer size mismatch");

    const NetworkConfig& cfg = net.config();
    const Layout& layout = net.layout();
    const int h_size = cfg.hidden;
    const int frames = cache.frames;

    // head
    {
        double* ghead = grads.data() + layout.head_w_off;
        for (int k = 0; k < h_size; ++k) ghead[k] += d_prediction * cache.final_h[k];
        grads[layout.head_b_off] += d_prediction;
    }
    if (d_prediction == 0.0) return;

    std::vector<std::vector<double>> dh_time(cfg.num_layers,
                                             std::vector<double>(h_size, 0.0));
    std::vector<std::vector<double>> dc_time(cfg.num_layers,
                                             std::vector<double>(h_size, 0.0));
    std::vector<double> dx_above;          // dx from the layer above at this t
    std::vector<double> da(4 * static_cast<size_t>(h_size));
    std::vector<double> dconcat;

    const auto head = net.head_w();

    for (int t = frames - 1; t >= 0; --t) {
        dx_above.clear();
        for (int l = cfg.num_layers - 1; l >= 0; --l) {
            const auto& lc = cache.layers[l];
            const int in_size = layout.layer_input(l);
            const int cols = h_size + in_size;
            const size_t base = static_cast<size_t>(t) * h_size;

            for (int k = 0; k < h_size; ++k) {
                double dh = dh_time[l][k];
                if (l == cfg.num_layers - 1 && t == frames - 1)
                    dh += d_prediction * head[k];
                if (l < cfg.num_layers - 1) dh += dx_above[k];

                const double i = lc.i[base + k];
                const double f = lc.f[base + k];
                const double o = lc.o[base + k];
                const double g = lc.g[base + k];
                const double tc = lc.tanh_c[base + k];

                double dc = dc_time[l][k] + dh * o * (1.0 - tc * tc);
                const double do_ = dh * tc;
                const double di = dc * g;
                const double df = dc * lc.c_prev[base + k];
                const double dg = dc * i;
                dc_time[l][k] = dc * f;

                da[k] = di * i * (1.0 - i);
                da[h_size + k] = df * f * (1.0 - f);
                da[2 * h_size + k] = do_ * o * (1.0 - o);
                da[3 * h_size + k] = dg * (1.0 - g * g);
            }

            const double* w = net.params().data() + layout.w_off[l];
            double* gw = grads.data() + layout.w_off[l];
            double* gb = grads.data() + layout.b_off[l];
            const double* h_prev = lc.h_prev.data() + base;
            const double* x = lc.x.data() + static_cast<size_t>(t) * in_size;

            dconcat.assign(cols, 0.0);
            for (int row = 0; row < 4 * h_size; ++row) {
                const double a = da[row];
                gb[row] += a;
                double* gw_row = gw + static_cast<size_t>(row) * cols;
                const double* w_row = w + static_cast<size_t>(row) * cols;
                if (a != 0.0) {
                    for (int j = 0; j < h_size; ++j) {
                        gw_row[j] += a * h_prev[j];
                        dconcat[j] += w_row[j] * a;
                    }
                    double* gw_x = gw_row + h_size;
                    const double* w_x = w_row + h_size;
                    double* dconcat_x = dconcat.data() + h_size;
                    for (int j = 0; j < in_size; ++j) {
                        gw_x[j] += a * x[j];
                        dconcat_x[j] += w_x[j] * a;
                    }
                }
            }
            std::copy(dconcat.begin(), dconcat.begin() + h_size, dh_time[l].begin());
            dx_above.assign(dconcat.begin() + h_size, dconcat.end());
        }
    }

    if (!cfg.bias) {
        for (int l = 0; l < cfg.num_layers; ++l) {
            double* gb = grads.data() + layout.b_off[l];
            std::fill(gb, gb + 4 * static_cast<size_t>(h_size), 0.0);
        }
    }
}

std::vector<double> backward(const Network& net, const ForwardCache& cache,
                             double d_prediction) {
    std::vector<double> grads(net.num_params(), 0.0);
    backward_into(net, cache, d_prediction, grads);
    return grads;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::ostream& out, uint32_t v) {
    std::array<char, 4> b{static_cast<char>(v & 0xFF),
                          static_cast<char>((v >> 8) & 0xFF),
                          static_cast<char>((v >> 16) & 0xFF),
                          static_cast<char>((v >> 24) & 0xFF)};
    out.write(b.data(), 4);
}

uint32_t get_u32(std::istream& in, const std::string& path) {
    std::array<unsigned char, 4> b;
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw IoError("truncated checkpoint: " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

} // namespace

void save_checkpoint(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out.write(kCheckpointMagic, 8);
    const NetworkConfig& cfg = net.config();
    put_u32(out, static_cast<uint32_t>(cfg.num_layers));
    put_u32(out, static_cast<uint32_t>(cfg.hidden));
    put_u32(out, static_cast<uint32_t>(cfg.feature_dim));
    uint32_t flags = 0;
    if (net.nm_inputs) flags |= 1u;
    if (cfg.bias) flags |= 2u;
    put_u32(out, flags);
    for (double v : net.params()) {
        const float f = static_cast<float>(v);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
    if (!out) throw IoError("write failed: " + path);
}

Network load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::array<char, 8> magic{};
    in.read(magic.data(), 8);
    if (!in || std::memcmp(magic.data(), kCheckpointMagic, 8) != 0)
        throw IoError("bad magic in " + path);

    constexpr uint32_t kMaxDim = 1u << 20;
    NetworkConfig cfg;
    const uint32_t layers = get_u32(in, path);
    const uint32_t hidden = get_u32(in, path);
    const uint32_t feature_dim = get_u32(in, path);
    if (layers == 0 || layers > 64 || hidden == 0 || hidden > kMaxDim ||
        feature_dim == 0 || feature_dim > kMaxDim)
        throw IoError("implausible network dimensions in " + path);
    cfg.num_layers = static_cast<int>(layers);
    cfg.hidden = static_cast<int>(hidden);
    cfg.feature_dim = static_cast<int>(feature_dim);
    const uint32_t flags = get_u32(in, path);
    cfg.bias = (flags & 2u) != 0;

    Network net = Network::zeros(cfg);

    // the payload must hold exactly the declared parameter count
    std::error_code ec;
    const auto actual = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat " + path);
    const uint64_t expected = 24 + 4ull * net.num_params();
    if (actual < expected) throw IoError("truncated checkpoint: " + path);
    if (actual > expected)
        throw IoError("payload longer than declared parameters in " + path);
    net.nm_inputs = (flags & 1u) != 0;
    auto params = net.params();
    for (size_t k = 0; k < params.size(); ++k) {
        const uint32_t bits = get_u32(in, path);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f)) throw IoError("non-finite parameter in " + path);
        params[k] = static_cast<double>(f);
    }
    return net;
}

} // namespace wanem::lstm
