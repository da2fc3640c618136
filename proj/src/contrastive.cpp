#include "tubelet/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tubelet/error.hpp"
#include "tubelet/rng.hpp"

namespace tubelet {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> stabilized_softmax(double positive_sim,
                                       std::span<const double> negative_sims,
                                       double tau, double* loss_out) {
    const std::size_t n = negative_sims.size();
    std::vector<double> logits(n + 1);
    logits[0] = positive_sim / tau;
    for (std::size_t i = 0; i < n; ++i) {
        logits[i + 1] = negative_sims[i] / tau;
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double& l : logits) {
        l = std::exp(l - m);
        denom += l;
    }
    for (double& l : logits) {
        l /= denom;  // now probabilities
    }
    if (loss_out != nullptr) {
        *loss_out = -std::log(logits[0]);
    }
    return logits;
}

void check_infonce_inputs(const Embedding& zq, const Embedding& zk,
                          std::span<const Embedding> negatives, double tau) {
    if (tau <= 0.0) {
        throw InvalidConfigError("infonce: temperature must be positive");
    }
    if (negatives.empty()) {
        throw InvalidInputError("infonce: at least one negative is required");
    }
    if (zq.size() != zk.size()) {
        throw InvalidInputError("infonce: embedding dimensions differ");
    }
    for (const Embedding& n : negatives) {
        if (n.size() != zq.size()) {
            throw InvalidInputError("infonce: negative dimension differs");
        }
    }
}

}  // namespace

double infonce_from_sims(double positive_sim, std::span<const double> negative_sims,
                         double tau) {
    if (tau <= 0.0) {
        throw InvalidConfigError("infonce: temperature must be positive");
    }
    if (negative_sims.empty()) {
        throw InvalidInputError("infonce: at least one negative is required");
    }
    double loss = 0.0;
    stabilized_softmax(positive_sim, negative_sims, tau, &loss);
    return loss;
}

double infonce(const Embedding& zq, const Embedding& zk,
               std::span<const Embedding> negatives, double tau) {
    check_infonce_inputs(zq, zk, negatives, tau);
    std::vector<double> negative_sims(negatives.size());
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        negative_sims[i] = dot(zq, negatives[i]);
    }
    return infonce_from_sims(dot(zq, zk), negative_sims, tau);
}

InfonceGrads infonce_grad(const Embedding& zq, const Embedding& zk,
                          std::span<const Embedding> negatives, double tau) {
    check_infonce_inputs(zq, zk, negatives, tau);
    std::vector<double> negative_sims(negatives.size());
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        negative_sims[i] = dot(zq, negatives[i]);
    }
    InfonceGrads grads;
    const std::vector<double> p =
        stabilized_softmax(dot(zq, zk), negative_sims, tau, &grads.loss);

    // dL/ds_0 = p_0 − 1, dL/ds_i = p_i; similarities are dot products, so
    // dL/dzq = Σ_j (dL/ds_j) z_j / τ and dL/dz_j = (dL/ds_j) zq / τ.
    const std::size_t dim = zq.size();
    grads.zq.assign(dim, 0.0);
    grads.zk.assign(dim, 0.0);
    grads.negatives.assign(negatives.size(), std::vector<double>(dim, 0.0));
    const double d0 = (p[0] - 1.0) / tau;
    for (std::size_t i = 0; i < dim; ++i) {
        grads.zq[i] = d0 * zk[i];
        grads.zk[i] = d0 * zq[i];
    }
    for (std::size_t n = 0; n < negatives.size(); ++n) {
        const double dn = p[n + 1] / tau;
        for (std::size_t i = 0; i < dim; ++i) {
            grads.zq[i] += dn * negatives[n][i];
            grads.negatives[n][i] = dn * zq[i];
        }
    }
    return grads;
}

NegativeQueue::NegativeQueue(int capacity) : capacity_(capacity) {
    if (capacity < 1) {
        throw InvalidConfigError("negative queue: capacity must be >= 1");
    }
}

void NegativeQueue::push(Embedding key, std::uint64_t tag) {
    const double n = norm(key);
    if (!(std::abs(n - 1.0) <= 1e-6)) {
        throw InvalidInputError("negative queue: keys must be unit-norm");
    }
    entries_.push_back(Entry{std::move(key), tag});
    while (entries_.size() > static_cast<std::size_t>(capacity_)) {
        entries_.pop_front();
    }
}

std::vector<Embedding> NegativeQueue::snapshot() const {
    std::vector<Embedding> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) {
        out.push_back(e.key);
    }
    return out;
}

std::vector<std::uint64_t> NegativeQueue::tags() const {
    std::vector<std::uint64_t> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) {
        out.push_back(e.tag);
    }
    return out;
}

bool NegativeQueue::contains_tag(std::uint64_t tag) const {
    for (const Entry& e : entries_) {
        if (e.tag == tag) {
            return true;
        }
    }
    return false;
}

std::vector<Embedding> NegativeQueue::snapshot_excluding(std::uint64_t tag) const {
    std::vector<Embedding> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) {
        if (e.tag != tag) {
            out.push_back(e.key);
        }
    }
    return out;
}

void momentum_update(const EncoderParams& query_params, EncoderParams& key_params,
                     double m) {
    if (m < 0.0 || m > 1.0) {
        throw InvalidConfigError("momentum_update: m must lie in [0, 1]");
    }
    if (query_params.layer_count() != key_params.layer_count()) {
        throw InvalidInputError("momentum_update: layer counts differ");
    }
    for (int l = 0; l < query_params.layer_count(); ++l) {
        const Matrix& qw = query_params.weights[l];
        Matrix& kw = key_params.weights[l];
        if (qw.rows != kw.rows || qw.cols != kw.cols ||
            query_params.biases[l].size() != key_params.biases[l].size()) {
            throw InvalidInputError("momentum_update: parameter shapes differ");
        }
        for (std::size_t i = 0; i < kw.a.size(); ++i) {
            kw.a[i] = m * kw.a[i] + (1.0 - m) * qw.a[i];
        }
        for (std::size_t i = 0; i < key_params.biases[l].size(); ++i) {
            key_params.biases[l][i] =
                m * key_params.biases[l][i] + (1.0 - m) * query_params.biases[l][i];
        }
    }
}

double cosine_lr(double base, int epoch, int total_epochs) {
    if (total_epochs <= 1) {
        return base;
    }
    return base * 0.5 *
           (1.0 + std::cos(kPi * static_cast<double>(epoch) /
                           static_cast<double>(total_epochs - 1)));
}

namespace {

struct Optimizer {
    EncoderGrads velocity;
    double momentum;
    double weight_decay;

    explicit Optimizer(const EncoderParams& params, double momentum, double weight_decay)
        : velocity(zero_grads(params)), momentum(momentum), weight_decay(weight_decay) {}

    void step(EncoderParams& params, const EncoderGrads& grads, double lr) {
        for (int l = 0; l < params.layer_count(); ++l) {
            for (std::size_t i = 0; i < params.weights[l].a.size(); ++i) {
                double& v = velocity.weights[l].a[i];
                v = momentum * v +
                    (grads.weights[l].a[i] + weight_decay * params.weights[l].a[i]);
                params.weights[l].a[i] -= lr * v;
            }
            for (std::size_t i = 0; i < params.biases[l].size(); ++i) {
                double& v = velocity.biases[l][i];
                v = momentum * v +
                    (grads.biases[l][i] + weight_decay * params.biases[l][i]);
                params.biases[l][i] -= lr * v;
            }
        }
    }
};

Embedding random_unit_embedding(Rng& rng, int dim) {
    Embedding e(dim);
    for (double& v : e) {
        v = rng.normal();
    }
    normalize(e);
    return e;
}

}  // namespace

TrainResult train(const std::vector<PairSample>& dataset, const TrainConfig& cfg) {
    if (dataset.empty()) {
        throw InvalidInputError("train: dataset is empty");
    }
    if (cfg.batch_size < 1 || cfg.epochs < 1) {
        throw InvalidConfigError("train: batch size and epochs must be positive");
    }
    if (cfg.temperature <= 0.0) {
        throw InvalidConfigError("train: temperature must be positive");
    }
    if (static_cast<std::size_t>(cfg.queue_capacity) >= dataset.size() * 2) {
        throw InvalidConfigError(
            "train: queue capacity must be smaller than clips per epoch");
    }

    TrainResult result;
    result.params = init_encoder(cfg.encoder, derive_seed(cfg.seed, "init"));
    EncoderParams key_params = result.params;
    Optimizer optimizer(result.params, cfg.momentum, cfg.weight_decay);

    // Queue pre-filled with random unit vectors so the first batches have
    // negatives; real keys displace them FIFO within a few steps.
    NegativeQueue queue(cfg.queue_capacity);
    {
        Rng qrng(derive_seed(cfg.seed, "queue"));
        for (int i = 0; i < cfg.queue_capacity; ++i) {
            queue.push(random_unit_embedding(qrng, cfg.encoder.embed));
        }
    }

    // The encoder input is a pure function of the clip; featurize once.
    std::vector<std::vector<double>> feat_a(dataset.size());
    std::vector<std::vector<double>> feat_b(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        feat_a[i] = featurize(dataset[i].clip_a, cfg.encoder);
        feat_b[i] = featurize(dataset[i].clip_b, cfg.encoder);
    }

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_lr(cfg.learning_rate, epoch, cfg.epochs);
        Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1],
                      order[static_cast<std::size_t>(shuffle_rng.uniform_int(0, i - 1))]);
        }

        double loss_sum = 0.0;
        int loss_count = 0;
        int batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size,
                         ++batch_index) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const int batch_n = static_cast<int>(stop - start);
            const std::vector<Embedding> negatives = queue.snapshot();

            auto diverged = [&](const char* what) {
                return TrainingDivergedError(
                    std::string("train: ") + what + " at epoch " +
                        std::to_string(epoch) + ", batch " + std::to_string(batch_index),
                    epoch, batch_index);
            };
            auto check_embedding = [&](const Embedding& z) {
                const double n = norm(z);
                if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) {
                    throw diverged("non-finite embedding");
                }
            };

            EncoderGrads grads = zero_grads(result.params);
            std::vector<std::pair<Embedding, std::uint64_t>> new_keys;
            new_keys.reserve(2 * batch_n);
            double batch_loss = 0.0;
            const double sample_weight = 1.0 / (2.0 * batch_n);
            for (std::size_t s = start; s < stop; ++s) {
                const std::size_t idx = order[s];
                // A negative must come from a different pair; drop this pair's
                // stale keys when the queue still holds them. If nothing else
                // remains (single-pair corner case) fall back to the full queue.
                const std::uint64_t tag = dataset[idx].seed;
                const std::vector<Embedding>* negs = &negatives;
                std::vector<Embedding> filtered;
                if (queue.contains_tag(tag)) {
                    filtered = queue.snapshot_excluding(tag);
                    if (!filtered.empty()) {
                        negs = &filtered;
                    }
                }
                // A→B and B→A directions, averaged.
                for (int dir = 0; dir < 2; ++dir) {
                    const std::vector<double>& q_in = dir == 0 ? feat_a[idx] : feat_b[idx];
                    const std::vector<double>& k_in = dir == 0 ? feat_b[idx] : feat_a[idx];
                    EncoderActivations q_acts = encode_forward(result.params, q_in);
                    const Embedding zk = encode_forward(key_params, k_in).embedding;
                    check_embedding(q_acts.embedding);
                    check_embedding(zk);
                    InfonceGrads lg =
                        infonce_grad(q_acts.embedding, zk, *negs, cfg.temperature);
                    batch_loss += lg.loss * sample_weight;
                    EncoderGrads sample_grads =
                        encode_backward(result.params, q_acts, lg.zq);
                    grads.add_scaled(sample_grads, sample_weight);
                    new_keys.emplace_back(zk, tag);
                }
            }
            if (!std::isfinite(batch_loss)) {
                throw diverged("non-finite loss");
            }
            optimizer.step(result.params, grads, lr);
            momentum_update(result.params, key_params, cfg.key_momentum);
            for (auto& [key, tag] : new_keys) {
                queue.push(std::move(key), tag);
            }
            result.step_losses.push_back(batch_loss);
            loss_sum += batch_loss;
            ++loss_count;
        }
        result.history.push_back(
            EpochStats{epoch, loss_sum / std::max(1, loss_count), lr});
    }
    return result;
}

RetrievalResult retrieval_topk(const std::vector<Embedding>& queries,
                               const std::vector<Embedding>& gallery) {
    if (queries.size() != gallery.size() || queries.size() < 2) {
        throw InvalidInputError("retrieval: need >= 2 query/gallery pairs");
    }
    int hit1 = 0;
    int hit5 = 0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const double true_sim = dot(queries[q], gallery[q]);
        int rank = 1;
        for (std::size_t g = 0; g < gallery.size(); ++g) {
            if (g == q) {
                continue;
            }
            const double sim = dot(queries[q], gallery[g]);
            if (sim > true_sim || (sim == true_sim && g < q)) {
                ++rank;
            }
        }
        if (rank <= 1) {
            ++hit1;
        }
        if (rank <= 5) {
            ++hit5;
        }
    }
    RetrievalResult r;
    r.top1 = static_cast<double>(hit1) / queries.size();
    r.top5 = static_cast<double>(hit5) / queries.size();
    return r;
}

RetrievalResult retrieval_eval(const EncoderParams& params,
                               const std::vector<PairSample>& probes) {
    if (probes.size() < 2) {
        throw InvalidInputError("retrieval_eval: need >= 2 probes");
    }
    std::vector<Embedding> queries(probes.size());
    std::vector<Embedding> gallery(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
        queries[i] = encode(params, probes[i].clip_a);
        gallery[i] = encode(params, probes[i].clip_b);
    }
    return retrieval_topk(queries, gallery);
}

}  // namespace tubelet
