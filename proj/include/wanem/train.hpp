#pragma once

// Training machinery: label-bin balancing, seeded train/validation split,
// MSE loss, SGD with momentum, minibatching and early stopping.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wanem/core.hpp"
#include "wanem/lstm.hpp"

namespace wanem::train {

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 32;              // desk default; 256 with --paper-size
    int max_epochs = 20;
    int early_stop_patience = 3;      // consecutive non-improving epochs tolerated
    double balance_bin_mps = 0.25;
    std::optional<int> balance_cap;   // nullopt = no balancing
    double train_fraction = 0.76;
    uint64_t seed = 0;
    int threads = 1;                  // per-sample forward/backward workers

    void validate() const;
};

struct EvalRecord {
    std::string clip_id;
    double y = 0.0;       // true label, m/s
    double y_hat = 0.0;   // predicted, m/s
    SourceTag source_tag = SourceTag::synthetic;
};

// sum((y - y_hat)^2) / N
double mse_loss(const std::vector<EvalRecord>& records);

// Bins labels as floor(label / bin_mps); bins over `cap` are down-sampled
// uniformly at random, survivors keep their original order.
DatasetManifest balance_dataset(const DatasetManifest& manifest, double bin_mps,
                                int cap, Rng& rng);

// Seeded uniform split; first fraction goes to train.
std::pair<DatasetManifest, DatasetManifest> split_manifest(
    const DatasetManifest& manifest, double train_fraction, Rng& rng);

// v' = momentum * v + g;  params' = params - learning_rate * v'
void sgd_momentum_step(std::span<double> params, std::span<const double> grads,
                       std::span<double> velocity, const TrainConfig& cfg);

struct EpochStats {
    int epoch = 0;          // 1-based
    double train_mse = 0.0;
    double val_rmse = 0.0;
    double seconds = 0.0;
};

struct FitResult {
    lstm::Network best;
    std::vector<EpochStats> history;
    int best_epoch = 0;     // 1-based epoch whose weights `best` holds
};

// Invoked after every completed epoch (progress reporting).
using EpochCallback = std::function<void(const EpochStats&)>;

// Shuffles per epoch, accumulates minibatch MSE gradients, applies momentum
// SGD, evaluates validation RMSE each epoch and returns the weights of the
// best epoch. Stops once the non-improving streak exceeds the patience.
//
// Per-sample forward/backward runs on cfg.threads workers. Each minibatch is
// split into contiguous chunks whose boundaries depend only on the batch
// size, and chunk gradients are merged in chunk order, so the result is
// bit-identical for every thread count. Parallel training holds one gradient
// buffer per chunk (up to 8).
FitResult fit(lstm::Network net, const std::vector<Sample>& train_samples,
              const std::vector<Sample>& val_samples, const TrainConfig& cfg,
              const EpochCallback& on_epoch = {});

// Predictions for a sample set under a trained network.
std::vector<EvalRecord> predict(const lstm::Network& net,
                                const std::vector<Sample>& samples);

double rmse_of(const std::vector<EvalRecord>& records);

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

} // namespace wanem::train
