#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "tubelet/compositor.hpp"
#include "tubelet/encoder.hpp"

namespace tubelet {

// −log[ exp(zq·zk/τ) / (exp(zq·zk/τ) + Σ_n exp(zq·z_n/τ)) ], computed with a
// max-subtraction stabilization. Requires at least one negative.
double infonce(const Embedding& zq, const Embedding& zk,
               std::span<const Embedding> negatives, double tau);

// Same loss evaluated from precomputed similarities (positive first).
double infonce_from_sims(double positive_sim, std::span<const double> negative_sims,
                         double tau);

struct InfonceGrads {
    std::vector<double> zq;
    std::vector<double> zk;
    std::vector<std::vector<double>> negatives;
    double loss = 0.0;
};

// Closed-form softmax-weighted gradients of the loss with respect to every
// input vector.
InfonceGrads infonce_grad(const Embedding& zq, const Embedding& zk,
                          std::span<const Embedding> negatives, double tau);

// FIFO of key embeddings used as negatives. Eviction is strictly
// first-in-first-out. Each entry carries a tag naming the pair it came from,
// so the trainer can keep a sample's own keys out of its negative set
// (negatives are clips with different tubelets).
class NegativeQueue {
public:
    static constexpr std::uint64_t kUntagged = ~0ULL;

    explicit NegativeQueue(int capacity);

    void push(Embedding key, std::uint64_t tag = kUntagged);
    int capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }

    // Contiguous snapshot in insertion order, for use as the negative set.
    std::vector<Embedding> snapshot() const;
    std::vector<std::uint64_t> tags() const;
    bool contains_tag(std::uint64_t tag) const;
    std::vector<Embedding> snapshot_excluding(std::uint64_t tag) const;

private:
    struct Entry {
        Embedding key;
        std::uint64_t tag;
    };
    int capacity_;
    std::deque<Entry> entries_;
};

// Every key parameter becomes m·key + (1−m)·query.
void momentum_update(const EncoderParams& query_params, EncoderParams& key_params,
                     double m);

struct TrainConfig {
    double temperature = 0.2;     // τ
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 0.0001;
    double key_momentum = 0.999;  // m
    int batch_size = 32;
    int epochs = 30;
    int queue_capacity = 256;     // Q
    EncoderConfig encoder;
    std::uint64_t seed = 0;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double learning_rate = 0.0;
};

struct TrainResult {
    EncoderParams params;
    std::vector<EpochStats> history;
    std::vector<double> step_losses;  // every batch loss, in step order
};

// lr(e) = base · 0.5 · (1 + cos(π e / (E−1))); lr(0) = base, lr(E−1) = 0.
double cosine_lr(double base, int epoch, int total_epochs);

// Momentum-contrastive training: the query encoder embeds one side of each
// pair, the key encoder (no gradient) embeds the other, InfoNCE is taken
// against the current queue, parameters step with SGD + momentum + weight
// decay on a cosine schedule, the key encoder tracks the query by exponential
// moving average, and keys are enqueued with FIFO eviction. Both pair
// directions contribute, averaged.
TrainResult train(const std::vector<PairSample>& dataset, const TrainConfig& cfg);

struct RetrievalResult {
    double top1 = 0.0;
    double top5 = 0.0;
};

// Ranks gallery embeddings by cosine similarity for each query; top-k is the
// fraction of queries whose true partner ranks within k. Ties broken by
// gallery index (lower index ranks first).
RetrievalResult retrieval_topk(const std::vector<Embedding>& queries,
                               const std::vector<Embedding>& gallery);

// Embeds every clip_a as query and every clip_b as gallery.
RetrievalResult retrieval_eval(const EncoderParams& params,
                               const std::vector<PairSample>& probes);

}  // namespace tubelet
