#include "wanem/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "wanem/parallel.hpp"

namespace wanem::train {

void TrainConfig::validate() const {
    // zero is allowed (no-op updates, useful for dry runs); negative is not
    if (learning_rate < 0.0) throw ValidationError("learning rate must be nonnegative");
    if (momentum < 0.0 || momentum >= 1.0)
        throw ValidationError("momentum must be in [0,1)");
    if (batch_size < 1) throw ValidationError("batch size must be positive");
    if (max_epochs < 1) throw ValidationError("max epochs must be positive");
    if (early_stop_patience < 0) throw ValidationError("patience must be nonnegative");
    if (balance_bin_mps <= 0.0) throw ValidationError("balance bin must be positive");
    if (balance_cap && *balance_cap < 1)
        throw ValidationError("balance cap must be positive");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ValidationError("train fraction must be in (0,1)");
    if (threads < 1) throw ValidationError("thread count must be positive");
}

double mse_loss(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw ValidationError("mse of empty record list");
    double sum = 0.0;
    for (const auto& r : records) {
        const double e = r.y - r.y_hat;
        sum += e * e;
    }
    return sum / static_cast<double>(records.size());
}

double rmse_of(const std::vector<EvalRecord>& records) {
    return std::sqrt(mse_loss(records));
}

DatasetManifest balance_dataset(const DatasetManifest& manifest, double bin_mps,
                                int cap, Rng& rng) {
    if (bin_mps <= 0.0) throw ValidationError("balance bin must be positive");
    if (cap < 1) throw ValidationError("balance cap must be positive");

    std::map<long, std::vector<size_t>> bins;   // bin index -> record indices
    for (size_t k = 0; k < manifest.records.size(); ++k) {
        const long bin = static_cast<long>(
            std::floor(manifest.records[k].label_mps / bin_mps));
        bins[bin].push_back(k);
    }

    std::vector<char> keep(manifest.records.size(), 1);
    for (auto& [bin, members] : bins) {
        if (static_cast<int>(members.size()) <= cap) continue;
        // partial Fisher-Yates: the first `cap` entries are a uniform subset
        std::vector<size_t> pool = members;
        for (int k = 0; k < cap; ++k) {
            const size_t j = k + static_cast<size_t>(rng.below(pool.size() - k));
            std::swap(pool[k], pool[j]);
        }
        for (size_t idx : members) keep[idx] = 0;
        for (int k = 0; k < cap; ++k) keep[pool[k]] = 1;
    }

    DatasetManifest out;
    for (size_t k = 0; k < manifest.records.size(); ++k)
        if (keep[k]) out.records.push_back(manifest.records[k]);
    return out;
}

std::pair<DatasetManifest, DatasetManifest> split_manifest(
    const DatasetManifest& manifest, double train_fraction, Rng& rng) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ValidationError("train fraction must be in (0,1)");
    if (manifest.records.size() < 2)
        throw ValidationError("need at least 2 records to split");

    std::vector<size_t> order(manifest.records.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    for (size_t k = 0; k + 1 < order.size(); ++k) {
        const size_t j = k + static_cast<size_t>(rng.below(order.size() - k));
        std::swap(order[k], order[j]);
    }

    size_t n_train = static_cast<size_t>(
        std::llround(train_fraction * static_cast<double>(order.size())));
    n_train = std::clamp<size_t>(n_train, 1, order.size() - 1);

    DatasetManifest train_set, val_set;
    for (size_t k = 0; k < order.size(); ++k)
        (k < n_train ? train_set : val_set).records.push_back(manifest.records[order[k]]);
    return {train_set, val_set};
}

void sgd_momentum_step(std::span<double> params, std::span<const double> grads,
                       std::span<double> velocity, const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != velocity.size())
        throw ValidationError("parameter/gradient/velocity shape mismatch");
    for (size_t k = 0; k < params.size(); ++k) {
        velocity[k] = cfg.momentum * velocity[k] + grads[k];
        params[k] -= cfg.learning_rate * velocity[k];
    }
}

std::vector<EvalRecord> predict(const lstm::Network& net,
                                const std::vector<Sample>& samples) {
    std::vector<EvalRecord> records;
    records.reserve(samples.size());
    for (const auto& s : samples)
        records.push_back(EvalRecord{s.clip_id, s.label_mps,
                                     lstm::forward(net, s.features), s.source_tag});
    return records;
}

FitResult fit(lstm::Network net, const std::vector<Sample>& train_samples,
              const std::vector<Sample>& val_samples, const TrainConfig& cfg,
              const EpochCallback& on_epoch) {
    cfg.validate();
    if (train_samples.empty()) throw ValidationError("empty training set");
    if (val_samples.empty()) throw ValidationError("empty validation set");
    for (const auto& s : train_samples)
        if (s.features.num_features != net.config().feature_dim)
            throw ValidationError("training sample feature dimension mismatch");
    for (const auto& s : val_samples)
        if (s.features.num_features != net.config().feature_dim)
            throw ValidationError("validation sample feature dimension mismatch");

    Rng rng(cfg.seed);
    std::vector<size_t> order(train_samples.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;

    // chunked minibatch gradients: boundaries depend only on the batch size
    // and chunks merge in index order, so any thread count reproduces the
    // same sums bit for bit
    constexpr size_t kGradientChunks = 8;
    std::vector<double> velocity(net.num_params(), 0.0);
    std::vector<double> grads(net.num_params(), 0.0);
    std::vector<std::vector<double>> chunk_grads(
        std::min<size_t>(kGradientChunks,
                         std::max<size_t>(1, cfg.batch_size)),
        std::vector<double>(net.num_params(), 0.0));
    std::vector<double> chunk_sq(chunk_grads.size(), 0.0);

    FitResult result;
    std::vector<double> best_params(net.params().begin(), net.params().end());
    bool best_nm = net.nm_inputs;
    double best_val = std::numeric_limits<double>::infinity();
    int non_improving = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        for (size_t k = 0; k + 1 < order.size(); ++k) {
            const size_t j = k + static_cast<size_t>(rng.below(order.size() - k));
            std::swap(order[k], order[j]);
        }

        double epoch_sq_sum = 0.0;
        size_t pos = 0;
        while (pos < order.size()) {
            const size_t batch_end =
                std::min(order.size(), pos + static_cast<size_t>(cfg.batch_size));
            const double batch_n = static_cast<double>(batch_end - pos);
            const auto chunks = make_chunks(batch_end - pos, kGradientChunks);

            run_chunks(chunks, cfg.threads, [&](size_t ci, const IndexChunk& chunk) {
                auto& local = chunk_grads[ci];
                std::fill(local.begin(), local.end(), 0.0);
                double sq = 0.0;
                lstm::ForwardCache cache;
                for (size_t k = chunk.begin; k < chunk.end; ++k) {
                    const Sample& s = train_samples[order[pos + k]];
                    const double pred = lstm::forward(net, s.features, &cache);
                    const double err = pred - s.label_mps;
                    sq += err * err;
                    lstm::backward_into(net, cache, 2.0 * err / batch_n, local);
                }
                chunk_sq[ci] = sq;
            });

            std::fill(grads.begin(), grads.end(), 0.0);
            for (size_t ci = 0; ci < chunks.size(); ++ci) {
                const auto& local = chunk_grads[ci];
                for (size_t p = 0; p < grads.size(); ++p) grads[p] += local[p];
                epoch_sq_sum += chunk_sq[ci];
            }
            sgd_momentum_step(net.params(), grads, velocity, cfg);
            pos = batch_end;
        }

        const double train_mse = epoch_sq_sum / static_cast<double>(order.size());
        if (!std::isfinite(train_mse))
            throw DivergenceError("training loss diverged at epoch " +
                                      std::to_string(epoch),
                                  epoch);

        const auto val_chunks = make_chunks(val_samples.size(), kGradientChunks);
        std::vector<double> val_chunk_sq(val_chunks.size(), 0.0);
        run_chunks(val_chunks, cfg.threads, [&](size_t ci, const IndexChunk& chunk) {
            double sq = 0.0;
            for (size_t k = chunk.begin; k < chunk.end; ++k) {
                const Sample& s = val_samples[k];
                const double err = lstm::forward(net, s.features) - s.label_mps;
                sq += err * err;
            }
            val_chunk_sq[ci] = sq;
        });
        double val_sq_sum = 0.0;
        for (double sq : val_chunk_sq) val_sq_sum += sq;
        const double val_rmse =
            std::sqrt(val_sq_sum / static_cast<double>(val_samples.size()));
        if (!std::isfinite(val_rmse))
            throw DivergenceError("validation loss diverged at epoch " +
                                      std::to_string(epoch),
                                  epoch);

        const auto t1 = std::chrono::steady_clock::now();
        result.history.push_back(EpochStats{
            epoch, train_mse, val_rmse,
            std::chrono::duration<double>(t1 - t0).count()});
        if (on_epoch) on_epoch(result.history.back());

        if (val_rmse < best_val) {
            best_val = val_rmse;
            best_params.assign(net.params().begin(), net.params().end());
            result.best_epoch = epoch;
            non_improving = 0;
        } else {
            ++non_improving;
            if (non_improving > cfg.early_stop_patience) break;
        }
    }

    result.best = std::move(net);
    std::copy(best_params.begin(), best_params.end(), result.best.params().begin());
    result.best.nm_inputs = best_nm;
    return result;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out << "epoch,train_mse,val_rmse,seconds\n";
    for (const auto& e : history)
        out << e.epoch << ',' << format_double(e.train_mse) << ','
            << format_double(e.val_rmse) << ',' << format_double(e.seconds) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

} // namespace wanem::train
