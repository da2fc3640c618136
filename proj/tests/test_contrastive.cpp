#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tubelet/contrastive.hpp"
#include "tubelet/error.hpp"
#include "tubelet/rng.hpp"
#include "tubelet/synthcorpus.hpp"

using namespace tubelet;

namespace {

Embedding random_unit(Rng& rng, int dim) {
    Embedding e(dim);
    for (double& v : e) {
        v = rng.normal();
    }
    normalize(e);
    return e;
}

Embedding basis(int dim, int axis) {
    Embedding e(dim, 0.0);
    e[axis] = 1.0;
    return e;
}

// Relative error with an absolute guard: below the finite-difference noise
// floor (truncation ~ h^2 / tau^3) agreement is checked absolutely.
double grad_error(double analytic, double numeric) {
    const double mag = std::max(std::abs(analytic), std::abs(numeric));
    if (mag < 1e-3) {
        return std::abs(analytic - numeric) <= 1e-7 ? 0.0 : 1.0;
    }
    return std::abs(analytic - numeric) / mag;
}

EncoderConfig tiny_encoder() {
    EncoderConfig cfg;
    cfg.grid_t = 2;
    cfg.grid_h = 2;
    cfg.grid_w = 2;
    cfg.hidden = 6;
    cfg.embed = 5;
    return cfg;
}

Clip noise_clip(int t, int h, int w, std::uint64_t seed) {
    return gen_clip(ClipKind::kUniformNoise, t, h, w, seed);
}

}  // namespace

TEST_CASE("encode output has unit norm") {
    EncoderConfig cfg;
    cfg.grid_t = 4;
    cfg.grid_h = 4;
    cfg.grid_w = 4;
    cfg.hidden = 32;
    cfg.embed = 16;
    const EncoderParams params = init_encoder(cfg, 7);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Embedding z = encode(params, noise_clip(8, 16, 16, seed));
        CHECK(std::abs(norm(z) - 1.0) < 1e-9);
    }
}

TEST_CASE("encode is deterministic for equal clips") {
    const EncoderParams params = init_encoder(tiny_encoder(), 3);
    const Clip clip = noise_clip(4, 8, 8, 5);
    Clip copy = clip;
    CHECK(encode(params, clip) == encode(params, copy));
}

TEST_CASE("constant clips have all-zero temporal-difference features") {
    const EncoderConfig cfg = tiny_encoder();
    const Clip clip(6, 8, 8, 93);
    const std::vector<double> features = featurize(clip, cfg);
    const std::size_t half = features.size() / 2;
    for (std::size_t i = half; i < features.size(); ++i) {
        CHECK(features[i] == 0.0);
    }
    for (std::size_t i = 0; i < half; ++i) {
        CHECK(features[i] == doctest::Approx(93.0 / 255.0).epsilon(1e-12));
    }
}

TEST_CASE("encode rejects clips smaller than the grid") {
    const EncoderParams params = init_encoder(tiny_encoder(), 11);
    CHECK_THROWS_AS(encode(params, Clip(1, 8, 8)), InvalidInputError);
}

TEST_CASE("infonce with all similarities equal is ln(1 + negative count)") {
    for (double c : {-0.3, 0.0, 0.7}) {
        const std::vector<double> negs(4, c);
        CHECK(std::abs(infonce_from_sims(c, negs, 0.2) - std::log(5.0)) < 1e-9);
    }
}

TEST_CASE("infonce closed form: positive 1, four zero negatives, tau 0.2") {
    // Oracle: direct scalar evaluation of ln(1 + 4 e^-5).
    const double expected = std::log(1.0 + 4.0 * std::exp(-5.0));
    const std::vector<double> negs(4, 0.0);
    CHECK(std::abs(infonce_from_sims(1.0, negs, 0.2) - expected) < 1e-6);

    // The same case through unit vectors.
    const int dim = 6;
    const Embedding zq = basis(dim, 0);
    const Embedding zk = basis(dim, 0);
    const std::vector<Embedding> negatives = {basis(dim, 1), basis(dim, 2),
                                              basis(dim, 3), basis(dim, 4)};
    CHECK(std::abs(infonce(zq, zk, negatives, 0.2) - expected) < 1e-6);
}

TEST_CASE("infonce closed form: positive 0.5, negatives {0.5, -0.5}, tau 0.2") {
    const double expected = std::log(2.0 + std::exp(-5.0));
    const std::vector<double> negs = {0.5, -0.5};
    CHECK(std::abs(infonce_from_sims(0.5, negs, 0.2) - expected) < 1e-6);
}

TEST_CASE("infonce requires at least one negative") {
    const Embedding zq = basis(4, 0);
    const Embedding zk = basis(4, 1);
    CHECK_THROWS_AS(infonce(zq, zk, {}, 0.2), InvalidInputError);
}

TEST_CASE("infonce is strictly positive with finite inputs") {
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        const Embedding zq = random_unit(rng, 16);
        const Embedding zk = random_unit(rng, 16);
        std::vector<Embedding> negs;
        for (int n = 0; n < 8; ++n) {
            negs.push_back(random_unit(rng, 16));
        }
        CHECK(infonce(zq, zk, negs, 0.2) > 0.0);
    }
}

TEST_CASE("permuting the negatives leaves the loss unchanged to 1e-12") {
    Rng rng(23);
    const Embedding zq = random_unit(rng, 12);
    const Embedding zk = random_unit(rng, 12);
    std::vector<Embedding> negs;
    for (int n = 0; n < 9; ++n) {
        negs.push_back(random_unit(rng, 12));
    }
    const double base = infonce(zq, zk, negs, 0.2);
    std::reverse(negs.begin(), negs.end());
    CHECK(std::abs(infonce(zq, zk, negs, 0.2) - base) < 1e-12);
    std::rotate(negs.begin(), negs.begin() + 4, negs.end());
    CHECK(std::abs(infonce(zq, zk, negs, 0.2) - base) < 1e-12);
}

TEST_CASE("shifting every similarity leaves the loss unchanged to 1e-12") {
    const std::vector<double> negs = {0.11, -0.4, 0.93, 0.02};
    const double base = infonce_from_sims(0.61, negs, 0.2);
    for (double shift : {-3.0, 0.5, 10.0}) {
        std::vector<double> shifted = negs;
        for (double& s : shifted) {
            s += shift;
        }
        CHECK(std::abs(infonce_from_sims(0.61 + shift, shifted, 0.2) - base) < 1e-12);
    }
}

TEST_CASE("infonce gradients match central finite differences") {
    const double h = 1e-5;
    double max_err = 0.0;
    int instance = 0;
    for (double tau : {0.07, 0.2, 1.0}) {
        Rng rng(1000 + static_cast<std::uint64_t>(tau * 1000));
        for (int rep = 0; rep < 34; ++rep) {
            ++instance;
            const int dim = 8;
            Embedding zq = random_unit(rng, dim);
            Embedding zk = random_unit(rng, dim);
            std::vector<Embedding> negs;
            for (int n = 0; n < 5; ++n) {
                negs.push_back(random_unit(rng, dim));
            }
            const InfonceGrads grads = infonce_grad(zq, zk, negs, tau);

            auto fd = [&](double* slot) {
                const double keep = *slot;
                *slot = keep + h;
                const double up = infonce(zq, zk, negs, tau);
                *slot = keep - h;
                const double down = infonce(zq, zk, negs, tau);
                *slot = keep;
                return (up - down) / (2.0 * h);
            };
            for (int i = 0; i < dim; ++i) {
                max_err = std::max(max_err, grad_error(grads.zq[i], fd(&zq[i])));
                max_err = std::max(max_err, grad_error(grads.zk[i], fd(&zk[i])));
                for (std::size_t n = 0; n < negs.size(); ++n) {
                    max_err =
                        std::max(max_err, grad_error(grads.negatives[n][i], fd(&negs[n][i])));
                }
            }
        }
    }
    CHECK(instance >= 100);
    CHECK(max_err <= 1e-5);
}

TEST_CASE("gradient with respect to zq vanishes when all vectors coincide") {
    const Embedding z = basis(6, 2);
    const std::vector<Embedding> negs(4, z);
    const InfonceGrads grads = infonce_grad(z, z, negs, 0.2);
    for (double g : grads.zq) {
        CHECK(std::abs(g) < 1e-12);
    }
}

TEST_CASE("gradient on an unused dimension is zero") {
    // Every vector is zero in dimension 5.
    Rng rng(31);
    Embedding zq = random_unit(rng, 5);
    Embedding zk = random_unit(rng, 5);
    zq.push_back(0.0);
    zk.push_back(0.0);
    std::vector<Embedding> negs;
    for (int n = 0; n < 3; ++n) {
        Embedding e = random_unit(rng, 5);
        e.push_back(0.0);
        negs.push_back(e);
    }
    const InfonceGrads grads = infonce_grad(zq, zk, negs, 0.2);
    CHECK(grads.zq[5] == 0.0);
    CHECK(grads.zk[5] == 0.0);
    for (const auto& g : grads.negatives) {
        CHECK(g[5] == 0.0);
    }
}

namespace {

// Central differences are only meaningful where the loss is smooth: away
// from rectifier kinks and with the pre-normalization norm bounded below
// (curvature scales with its inverse cube). Redraw until both hold.
EncoderActivations smooth_instance(Rng& rng, const EncoderConfig& cfg,
                                   EncoderParams& params, std::vector<double>& input) {
    while (true) {
        params = init_encoder(cfg, rng.next_u64());
        for (double& v : input) {
            v = rng.uniform(0.0, 1.0);
        }
        EncoderActivations acts = encode_forward(params, input);
        if (acts.output_norm < 0.5) {
            continue;
        }
        bool near_kink = false;
        for (int l = 0; l + 1 < params.layer_count(); ++l) {
            for (double pre : acts.pre[l]) {
                near_kink = near_kink || std::abs(pre) < 1e-3;
            }
        }
        if (!near_kink) {
            return acts;
        }
    }
}

}  // namespace

TEST_CASE("encoder backprop matches central finite differences") {
    const double h = 1e-5;
    const EncoderConfig cfg = tiny_encoder();
    double max_err = 0.0;
    int instances = 0;
    for (double tau : {0.07, 0.2, 1.0}) {
        Rng rng(7000 + static_cast<std::uint64_t>(tau * 1000));
        for (int rep = 0; rep < 34; ++rep) {
            ++instances;
            EncoderParams params;
            std::vector<double> input(cfg.input_dim());
            const EncoderActivations acts = smooth_instance(rng, cfg, params, input);
            const Embedding zk = random_unit(rng, cfg.embed);
            std::vector<Embedding> negs;
            for (int n = 0; n < 4; ++n) {
                negs.push_back(random_unit(rng, cfg.embed));
            }

            const InfonceGrads lg = infonce_grad(acts.embedding, zk, negs, tau);
            const EncoderGrads grads = encode_backward(params, acts, lg.zq);

            auto loss_at = [&]() {
                const Embedding z = encode_forward(params, input).embedding;
                return infonce(z, zk, negs, tau);
            };
            auto fd_check = [&](double* slot, double analytic) {
                const double keep = *slot;
                *slot = keep + h;
                const double up = loss_at();
                *slot = keep - h;
                const double down = loss_at();
                *slot = keep;
                max_err = std::max(max_err, grad_error(analytic, (up - down) / (2.0 * h)));
            };
            for (int l = 0; l < params.layer_count(); ++l) {
                for (std::size_t i = 0; i < params.weights[l].a.size(); ++i) {
                    fd_check(&params.weights[l].a[i], grads.weights[l].a[i]);
                }
                for (std::size_t i = 0; i < params.biases[l].size(); ++i) {
                    fd_check(&params.biases[l][i], grads.biases[l][i]);
                }
            }
        }
    }
    CHECK(instances >= 100);
    CHECK(max_err <= 1e-5);
}

TEST_CASE("momentum_update endpoints and scalar probe") {
    EncoderConfig cfg = tiny_encoder();
    const EncoderParams query = init_encoder(cfg, 1);
    EncoderParams key = init_encoder(cfg, 2);

    EncoderParams key_m1 = key;
    momentum_update(query, key_m1, 1.0);
    for (int l = 0; l < key.layer_count(); ++l) {
        CHECK(key_m1.weights[l].a == key.weights[l].a);
    }

    EncoderParams key_m0 = key;
    momentum_update(query, key_m0, 0.0);
    for (int l = 0; l < key.layer_count(); ++l) {
        CHECK(key_m0.weights[l].a == query.weights[l].a);
    }

    EncoderParams probe_query = query;
    EncoderParams probe_key = key;
    probe_query.weights[1].a[0] = 4.0;
    probe_key.weights[1].a[0] = 2.0;
    momentum_update(probe_query, probe_key, 0.5);
    CHECK(probe_key.weights[1].a[0] == 3.0);
}

TEST_CASE("momentum_update rejects mismatched shapes") {
    EncoderConfig big = tiny_encoder();
    big.hidden = 8;
    const EncoderParams query = init_encoder(tiny_encoder(), 1);
    EncoderParams key = init_encoder(big, 2);
    CHECK_THROWS_AS(momentum_update(query, key, 0.9), InvalidInputError);
}

TEST_CASE("queue holds exactly the last min(n*b, Q) keys in insertion order") {
    const int dim = 64;
    NegativeQueue queue(8);
    std::vector<Embedding> pushed;
    for (int batch = 0; batch < 4; ++batch) {
        for (int i = 0; i < 3; ++i) {
            const Embedding key = basis(dim, batch * 3 + i);
            pushed.push_back(key);
            queue.push(key);
        }
        const std::size_t expected = std::min<std::size_t>(pushed.size(), 8);
        REQUIRE(queue.size() == expected);
        const auto snapshot = queue.snapshot();
        for (std::size_t i = 0; i < expected; ++i) {
            CHECK(snapshot[i] == pushed[pushed.size() - expected + i]);
        }
    }
}

TEST_CASE("queue rejects non-unit keys") {
    NegativeQueue queue(4);
    Embedding bad(8, 0.5);
    CHECK_THROWS_AS(queue.push(bad), InvalidInputError);
}

TEST_CASE("cosine schedule endpoints") {
    CHECK(cosine_lr(0.01, 0, 30) == 0.01);
    CHECK(cosine_lr(0.01, 29, 30) <= 0.01 * 0.01);
    CHECK(cosine_lr(0.01, 0, 1) == 0.01);
    for (int e = 1; e < 30; ++e) {
        CHECK(cosine_lr(0.01, e, 30) < cosine_lr(0.01, e - 1, 30));
    }
}

namespace {

std::vector<PairSample> tiny_dataset(int pairs, std::uint64_t seed) {
    std::vector<PairSample> dataset(pairs);
    for (int i = 0; i < pairs; ++i) {
        dataset[i].clip_a = noise_clip(4, 8, 8, seed + 2 * i);
        dataset[i].clip_b = noise_clip(4, 8, 8, seed + 2 * i + 1);
        dataset[i].seed = seed + i;
    }
    return dataset;
}

TrainConfig tiny_train_config() {
    TrainConfig cfg;
    cfg.encoder = tiny_encoder();
    cfg.batch_size = 4;
    cfg.epochs = 2;
    cfg.queue_capacity = 8;
    cfg.seed = 5;
    return cfg;
}

bool params_equal(const EncoderParams& a, const EncoderParams& b) {
    for (int l = 0; l < a.layer_count(); ++l) {
        if (a.weights[l].a != b.weights[l].a || a.biases[l] != b.biases[l]) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("zero learning rate leaves parameters bit-identical") {
    const std::vector<PairSample> dataset = tiny_dataset(8, 100);
    TrainConfig cfg = tiny_train_config();
    cfg.learning_rate = 0.0;
    cfg.epochs = 1;
    const TrainResult one = train(dataset, cfg);
    cfg.epochs = 5;
    const TrainResult five = train(dataset, cfg);
    CHECK(params_equal(one.params, five.params));
}

TEST_CASE("loss decreases over the first 10 steps on a repeated pair") {
    // Reference configuration: one pair repeated, batch size 1, and a large
    // queue that stays mostly random over the probed steps.
    std::vector<PairSample> dataset(96);
    const PairSample pair = tiny_dataset(1, 400)[0];
    std::fill(dataset.begin(), dataset.end(), pair);
    TrainConfig cfg = tiny_train_config();
    cfg.encoder.hidden = 16;
    cfg.batch_size = 1;
    cfg.epochs = 1;
    cfg.queue_capacity = 128;
    cfg.learning_rate = 0.01;
    cfg.seed = 13;
    const TrainResult result = train(dataset, cfg);
    REQUIRE(result.step_losses.size() >= 11);
    for (int s = 1; s <= 10; ++s) {
        CHECK(result.step_losses[s] < result.step_losses[s - 1]);
    }
}

TEST_CASE("train reports divergence with a non-finite loss") {
    const std::vector<PairSample> dataset = tiny_dataset(8, 300);
    TrainConfig cfg = tiny_train_config();
    cfg.learning_rate = 1e12;
    cfg.epochs = 20;
    cfg.weight_decay = 1.0;
    bool diverged = false;
    try {
        train(dataset, cfg);
    } catch (const TrainingDivergedError& e) {
        diverged = true;
        CHECK(e.epoch >= 0);
        CHECK(e.batch >= 0);
    }
    CHECK(diverged);
}

TEST_CASE("train rejects a queue at least as large as the clips per epoch") {
    const std::vector<PairSample> dataset = tiny_dataset(4, 200);
    TrainConfig cfg = tiny_train_config();
    cfg.queue_capacity = 8;  // dataset provides exactly 8 clips per epoch
    CHECK_THROWS_AS(train(dataset, cfg), InvalidConfigError);
}

TEST_CASE("full-run determinism: identical seeds give identical results") {
    const std::vector<PairSample> dataset = tiny_dataset(10, 500);
    const TrainConfig cfg = tiny_train_config();
    const TrainResult a = train(dataset, cfg);
    const TrainResult b = train(dataset, cfg);
    CHECK(params_equal(a.params, b.params));
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].mean_loss == b.history[i].mean_loss);
        CHECK(a.history[i].learning_rate == b.history[i].learning_rate);
    }
}

TEST_CASE("retrieval with gallery equal to queries is perfect") {
    Rng rng(61);
    std::vector<Embedding> queries;
    for (int i = 0; i < 12; ++i) {
        queries.push_back(random_unit(rng, 16));
    }
    const RetrievalResult r = retrieval_topk(queries, queries);
    CHECK(r.top1 == 1.0);
    CHECK(r.top5 == 1.0);
}

TEST_CASE("random retrieval is near chance: top1 about 1/G") {
    // Monte Carlo oracle: 50 trials of G random unit embeddings.
    const int trials = 50;
    const int gallery_size = 20;
    Rng rng(71);
    double total_top1 = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::vector<Embedding> queries;
        std::vector<Embedding> gallery;
        for (int i = 0; i < gallery_size; ++i) {
            queries.push_back(random_unit(rng, 24));
            gallery.push_back(random_unit(rng, 24));
        }
        total_top1 += retrieval_topk(queries, gallery).top1;
    }
    const double mean_top1 = total_top1 / trials;
    const double p = 1.0 / gallery_size;
    const double stderr3 = 3.0 * std::sqrt(p * (1.0 - p) / (trials * gallery_size));
    CHECK(std::abs(mean_top1 - p) <= stderr3);
}

TEST_CASE("swapped partners give zero top1 and a top5 capped by the gallery") {
    std::vector<Embedding> queries = {basis(4, 0), basis(4, 1)};
    std::vector<Embedding> gallery = {basis(4, 1), basis(4, 0)};
    const RetrievalResult r = retrieval_topk(queries, gallery);
    CHECK(r.top1 == 0.0);
    CHECK(r.top5 == 1.0);  // rank can never exceed the 2-item gallery
}

TEST_CASE("retrieval_eval requires at least two probes") {
    const EncoderParams params = init_encoder(tiny_encoder(), 9);
    std::vector<PairSample> probes = tiny_dataset(1, 600);
    CHECK_THROWS_AS(retrieval_eval(params, probes), InvalidInputError);
}
