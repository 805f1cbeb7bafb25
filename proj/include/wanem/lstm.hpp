#pragma once

// Many-to-one stacked LSTM regressor: gate equations, forward pass over a
// feature sequence, full backpropagation through time, and the binary
// checkpoint format. Parameters live in one flat buffer in a documented
// order so the optimizer, gradient checks and checkpoints all share it.

#include <span>
#include <string>
#include <vector>

#include "wanem/core.hpp"

namespace wanem::lstm {

// Overflow-safe logistic function sigma(x) = e^x / (e^x + 1). Saturates to
// exactly 0 / 1 once e^x under- or overflows, which keeps the forced-gate
// limits of the cell equations exact.
double sigmoid(double x);

struct NetworkConfig {
    int num_layers = 2;
    int hidden = 64;
    int feature_dim = 0;
    bool bias = true;   // bias vector on the gate pre-activations

    bool operator==(const NetworkConfig&) const = default;
};

// Flat-buffer layout: per layer, W (4H x (H + D_in), row-major, gate rows
// blocked in i,f,o,g order) then b (4H); then head_w (H) and head_b.
struct Layout {
    NetworkConfig cfg;
    std::vector<size_t> w_off, b_off;
    size_t head_w_off = 0, head_b_off = 0, total = 0;

    static Layout make(const NetworkConfig& cfg);
    int layer_input(int l) const {
        return l == 0 ? cfg.feature_dim : cfg.hidden;
    }
};

// Read-only view of one layer's parameters.
struct LayerParams {
    int hidden = 0;   // H
    int input = 0;    // D_in
    std::span<const double> w;   // 4H x (H + input), row-major
    std::span<const double> b;   // 4H
};

struct LayerState {
    std::vector<double> h, c;

    static LayerState zeros(int hidden) {
        return LayerState{std::vector<double>(hidden, 0.0),
                          std::vector<double>(hidden, 0.0)};
    }
};

// One cell update on the concatenated input [h_prev; x]:
//   (i,f,o,g) = (sigma,sigma,sigma,tanh)(W [h_prev; x] + b)
//   c' = f.c + i.g,  h' = o.tanh(c')
// Throws on non-finite parameters or input.
void cell_step(const LayerParams& params, LayerState& state, std::span<const double> x);

class Network {
public:
    Network() = default;

    // Weights uniform in [-1/sqrt(H+D_in), +1/sqrt(H+D_in)] per layer,
    // biases zero except the forget block at 1.0 (when bias is enabled).
    static Network init(const NetworkConfig& cfg, Rng& rng);
    static Network zeros(const NetworkConfig& cfg);

    const NetworkConfig& config() const { return cfg_; }
    const Layout& layout() const { return layout_; }
    size_t num_params() const { return layout_.total; }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    LayerParams layer(int l) const;
    std::span<const double> head_w() const;
    double head_b() const { return params_[layout_.head_b_off]; }

    // Metadata carried in checkpoints: inputs were mean-subtracted during
    // training, so evaluation must apply the same variant.
    bool nm_inputs = false;

private:
    NetworkConfig cfg_;
    Layout layout_;
    std::vector<double> params_;
};

// Everything backward needs from a forward pass. Valid only for the exact
// network object and parameter values it was computed from.
struct ForwardCache {
    struct LayerCache {
        std::vector<double> x;        // T x D_in inputs to this layer
        std::vector<double> h_prev, c_prev;              // T x H
        std::vector<double> i, f, o, g, c, tanh_c;       // T x H
    };
    const Network* net = nullptr;
    int frames = 0;
    std::vector<LayerCache> layers;
    std::vector<double> final_h;
    double prediction = 0.0;
};

// Zero initial states; layers applied bottom-up each time step; prediction
// is the linear head on the last layer's final hidden state.
double forward(const Network& net, const FeatureSequence& seq,
               ForwardCache* cache = nullptr);

// Gradients of (d_prediction * prediction) with respect to every parameter,
// accumulated into `grads` (flat, same layout as net.params()).
void backward_into(const Network& net, const ForwardCache& cache,
                   double d_prediction, std::span<double> grads);
std::vector<double> backward(const Network& net, const ForwardCache& cache,
                             double d_prediction);

// Checkpoint file: magic "WANEMW01", u32 num_layers, u32 hidden,
// u32 feature_dim, u32 flags (bit0 nm inputs, bit1 bias enabled), then the
// flat parameter buffer as float32 little-endian.
inline constexpr char kCheckpointMagic[9] = "WANEMW01";

void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

} // namespace wanem::lstm
