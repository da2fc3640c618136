// Acceptance suite: every check runs with its tolerance pinned in code and
// prints one PASS/FAIL line. The binary exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tubelet/cli.hpp"
#include "tubelet/compositor.hpp"
#include "tubelet/config.hpp"
#include "tubelet/contrastive.hpp"
#include "tubelet/error.hpp"
#include "tubelet/rng.hpp"
#include "tubelet/runner.hpp"
#include "tubelet/storage.hpp"
#include "tubelet/synthcorpus.hpp"
#include "tubelet/trajectory.hpp"

using namespace tubelet;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }
};

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tubelet_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return "<missing:" + path.string() + ">";
    }
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// 1. Shared-tubelet invariant: 200 pairs across all motion/transform modes,
//    integer equality inside coverage-1, source equality at zero coverage.
// ---------------------------------------------------------------------------
Check criterion_shared_tubelet(double* seconds_budget) {
    *seconds_budget = 30.0;
    Check check;
    const MotionKind motions[] = {MotionKind::kStatic, MotionKind::kLinear,
                                  MotionKind::kNonlinear};
    const TransformKind transforms[] = {TransformKind::kNone, TransformKind::kScale,
                                        TransformKind::kRotation,
                                        TransformKind::kShear};
    const ClipKind backgrounds[] = {ClipKind::kUniformNoise, ClipKind::kMovingGradient,
                                    ClipKind::kDriftingBlobs, ClipKind::kStaticTexture};
    int generated = 0;
    std::uint64_t seed = 1000;
    auto verify = [&](const PairDetail& detail, const char* label) {
        ++generated;
        std::string why;
        if (!check_shared_tubelet_invariant(detail, &why)) {
            check.require(false, std::string(label) + ": " + why);
        }
    };
    // 12 motion x transform combinations, 15 pairs each = 180.
    for (MotionKind motion : motions) {
        for (TransformKind transform : transforms) {
            PairConfig cfg;
            cfg.motion = motion;
            cfg.transform = transform;
            for (int rep = 0; rep < 15; ++rep) {
                ++seed;
                const ClipKind bg = backgrounds[seed % 4];
                const Clip v1 = gen_clip(bg, 16, 32, 32, seed * 2);
                const Clip v2 = gen_clip(bg, 16, 32, 32, seed * 2 + 1);
                verify(make_pair_detailed(v1, v2, cfg, seed), "pair");
            }
        }
    }
    // Scaled-crop control, 20 pairs.
    PairConfig control_cfg;
    for (int rep = 0; rep < 20; ++rep) {
        ++seed;
        const Clip v1 = gen_clip(backgrounds[seed % 4], 16, 32, 32, seed * 2);
        const Clip v2 = gen_clip(backgrounds[seed % 4], 16, 32, 32, seed * 2 + 1);
        verify(make_scaled_crop_control_detailed(v1, v2, control_cfg, seed), "control");
    }
    check.require(generated == 200, "expected 200 generated pairs");
    if (check.ok) {
        check.detail = "200 pairs exact inside and outside coverage";
    }
    return check;
}

// ---------------------------------------------------------------------------
// 2. Trajectory suite over 100 seeds each.
// ---------------------------------------------------------------------------
Check criterion_trajectories(double* seconds_budget) {
    *seconds_budget = 10.0;
    Check check;

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const KeyframeSet keys = sample_keyframes(16, 3, seed);
        check.require(keys.indices.front() == 0 && keys.indices.back() == 15,
                      "keyframes must include the first and last frame");
    }

    MotionConfig paper;
    paper.kind = MotionKind::kLinear;
    paper.frames = 16;
    paper.width = 112;
    paper.height = 112;
    paper.keyframes = 3;
    paper.delta_min = 40.0;
    paper.delta_max = 80.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const LinearTrajectoryDetail d = linear_trajectory_detailed(paper, seed);
        for (std::size_t k = 0; k + 1 < d.keyframes.indices.size(); ++k) {
            const int a = d.keyframes.indices[k];
            const int b = d.keyframes.indices[k + 1];
            const double dist = std::hypot(
                d.keyframe_centers[k + 1].x - d.keyframe_centers[k].x,
                d.keyframe_centers[k + 1].y - d.keyframe_centers[k].y);
            check.require(dist >= 40.0 && dist <= 80.0,
                          "keyframe displacement outside [40, 80] at 112 scale");
            for (int i = a; i <= b; ++i) {
                const double t = static_cast<double>(i - a) / (b - a);
                const double ex = (1.0 - t) * d.keyframe_centers[k].x +
                                  t * d.keyframe_centers[k + 1].x;
                const double ey = (1.0 - t) * d.keyframe_centers[k].y +
                                  t * d.keyframe_centers[k + 1].y;
                check.require(std::abs(d.trajectory.centers[i].x - ex) < 1e-9 &&
                                  std::abs(d.trajectory.centers[i].y - ey) < 1e-9,
                              "linear interpolation deviates beyond 1e-9");
            }
        }
    }

    // Scaled bounds at desk scale.
    MotionConfig desk = paper;
    desk.width = 32;
    desk.height = 32;
    desk.delta_min = 40.0 * 32.0 / 112.0;
    desk.delta_max = 80.0 * 32.0 / 112.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const LinearTrajectoryDetail d = linear_trajectory_detailed(desk, seed);
        for (std::size_t k = 0; k + 1 < d.keyframe_centers.size(); ++k) {
            const double dist = std::hypot(
                d.keyframe_centers[k + 1].x - d.keyframe_centers[k].x,
                d.keyframe_centers[k + 1].y - d.keyframe_centers[k].y);
            check.require(dist >= desk.delta_min && dist <= desk.delta_max,
                          "keyframe displacement outside scaled bounds at 32 scale");
        }
    }

    MotionConfig nonlinear = desk;
    nonlinear.kind = MotionKind::kNonlinear;
    nonlinear.oversample = 48;
    nonlinear.sigma = 8.0;
    auto msd = [](const std::vector<double>& v) {
        double acc = 0.0;
        int count = 0;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            const double d = v[i + 1] - 2.0 * v[i] + v[i - 1];
            acc += d * d;
            ++count;
        }
        return acc / count;
    };
    int smoother = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const NonlinearTrajectoryDetail d = nonlinear_trajectory_detailed(nonlinear, seed);
        if (msd(d.smoothed_x) < msd(d.raw_x) && msd(d.smoothed_y) < msd(d.raw_y)) {
            ++smoother;
        }
    }
    check.require(smoother == 100, "smoothing must reduce curvature in 100/100 seeds");

    for (MotionKind kind :
         {MotionKind::kStatic, MotionKind::kLinear, MotionKind::kNonlinear}) {
        MotionConfig cfg = desk;
        cfg.kind = kind;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const Trajectory traj = make_trajectory(cfg, seed);
            check.require(traj.length() == cfg.frames, "trajectory length mismatch");
            for (const Vec2& c : traj.centers) {
                check.require(c.x >= 0.0 && c.x <= cfg.width && c.y >= 0.0 &&
                                  c.y <= cfg.height,
                              "trajectory coordinate out of bounds");
            }
        }
    }
    if (check.ok) {
        check.detail = "keyframes, interpolation, displacement bounds, smoothing, bounds";
    }
    return check;
}

// ---------------------------------------------------------------------------
// 3. InfoNCE closed forms and invariances.
// ---------------------------------------------------------------------------
Check criterion_infonce(double* seconds_budget) {
    *seconds_budget = 10.0;
    Check check;

    for (double c : {-0.4, 0.0, 0.9}) {
        const std::vector<double> negs(4, c);
        check.require(std::abs(infonce_from_sims(c, negs, 0.2) - std::log(5.0)) <= 1e-9,
                      "equal-similarity loss must be ln 5 within 1e-9");
    }

    // Scalar evaluation of the closed form ln(1 + 4 e^-5).
    const double closed_form = std::log(1.0 + 4.0 * std::exp(-5.0));
    const std::vector<double> zero_negs(4, 0.0);
    check.require(std::abs(infonce_from_sims(1.0, zero_negs, 0.2) - closed_form) <= 1e-6,
                  "positive-1 / four-zero-negatives loss must match ln(1 + 4e^-5)");

    Rng rng(77);
    Embedding zq(16), zk(16);
    for (double& v : zq) v = rng.normal();
    for (double& v : zk) v = rng.normal();
    normalize(zq);
    normalize(zk);
    std::vector<Embedding> negs;
    for (int n = 0; n < 9; ++n) {
        Embedding e(16);
        for (double& v : e) v = rng.normal();
        normalize(e);
        negs.push_back(e);
    }
    const double base = infonce(zq, zk, negs, 0.2);
    std::vector<Embedding> permuted(negs.rbegin(), negs.rend());
    check.require(std::abs(infonce(zq, zk, permuted, 0.2) - base) <= 1e-12,
                  "permuting negatives changed the loss beyond 1e-12");

    const std::vector<double> sims = {0.3, -0.2, 0.8, 0.05};
    const double unshifted = infonce_from_sims(0.5, sims, 0.2);
    for (double shift : {-5.0, 2.5}) {
        std::vector<double> shifted = sims;
        for (double& s : shifted) s += shift;
        check.require(
            std::abs(infonce_from_sims(0.5 + shift, shifted, 0.2) - unshifted) <= 1e-12,
            "similarity shift changed the loss beyond 1e-12");
    }
    if (check.ok) {
        check.detail = "ln 5, ln(1+4e^-5), permutation and shift invariance";
    }
    return check;
}

// ---------------------------------------------------------------------------
// 4. Analytic gradients vs central finite differences (step 1e-5).
// ---------------------------------------------------------------------------
Check criterion_gradients(double* seconds_budget) {
    *seconds_budget = 60.0;
    Check check;
    const double h = 1e-5;
    double max_err = 0.0;
    auto err_of = [](double analytic, double numeric) {
        const double mag = std::max(std::abs(analytic), std::abs(numeric));
        if (mag < 1e-3) {
            return std::abs(analytic - numeric) <= 1e-7 ? 0.0 : 1.0;
        }
        return std::abs(analytic - numeric) / mag;
    };

    EncoderConfig cfg;
    cfg.grid_t = 2;
    cfg.grid_h = 2;
    cfg.grid_w = 2;
    cfg.hidden = 6;
    cfg.embed = 5;

    int instances = 0;
    for (double tau : {0.07, 0.2, 1.0}) {
        Rng rng(9000 + static_cast<std::uint64_t>(tau * 1000));
        auto random_unit = [&](int dim) {
            Embedding e(dim);
            for (double& v : e) v = rng.normal();
            normalize(e);
            return e;
        };
        for (int rep = 0; rep < 34; ++rep) {
            ++instances;
            // Redraw until smooth: away from rectifier kinks, with the
            // pre-normalization norm bounded below.
            EncoderParams params;
            std::vector<double> input(cfg.input_dim());
            EncoderActivations acts;
            while (true) {
                params = init_encoder(cfg, rng.next_u64());
                for (double& v : input) v = rng.uniform(0.0, 1.0);
                acts = encode_forward(params, input);
                if (acts.output_norm < 0.5) continue;
                bool near_kink = false;
                for (int l = 0; l + 1 < params.layer_count(); ++l) {
                    for (double pre : acts.pre[l]) {
                        near_kink = near_kink || std::abs(pre) < 1e-3;
                    }
                }
                if (!near_kink) break;
            }
            Embedding zk = random_unit(cfg.embed);
            std::vector<Embedding> negs;
            for (int n = 0; n < 4; ++n) {
                negs.push_back(random_unit(cfg.embed));
            }

            // InfoNCE-level gradients.
            Embedding zq = acts.embedding;
            const InfonceGrads lg = infonce_grad(zq, zk, negs, tau);
            auto fd_loss = [&](double* slot) {
                const double keep = *slot;
                *slot = keep + h;
                const double up = infonce(zq, zk, negs, tau);
                *slot = keep - h;
                const double down = infonce(zq, zk, negs, tau);
                *slot = keep;
                return (up - down) / (2.0 * h);
            };
            for (int i = 0; i < cfg.embed; ++i) {
                max_err = std::max(max_err, err_of(lg.zq[i], fd_loss(&zq[i])));
                max_err = std::max(max_err, err_of(lg.zk[i], fd_loss(&zk[i])));
            }

            // Encoder-parameter gradients.
            const EncoderGrads grads = encode_backward(params, acts, lg.zq);
            auto loss_at = [&]() {
                return infonce(encode_forward(params, input).embedding, zk, negs, tau);
            };
            auto fd_param = [&](double* slot) {
                const double keep = *slot;
                *slot = keep + h;
                const double up = loss_at();
                *slot = keep - h;
                const double down = loss_at();
                *slot = keep;
                return (up - down) / (2.0 * h);
            };
            for (int l = 0; l < params.layer_count(); ++l) {
                for (std::size_t i = 0; i < params.weights[l].a.size(); ++i) {
                    max_err = std::max(
                        max_err, err_of(grads.weights[l].a[i], fd_param(&params.weights[l].a[i])));
                }
                for (std::size_t i = 0; i < params.biases[l].size(); ++i) {
                    max_err = std::max(
                        max_err, err_of(grads.biases[l][i], fd_param(&params.biases[l][i])));
                }
            }
        }
    }
    check.require(instances >= 100, "need at least 100 instances");
    check.require(max_err <= 1e-5, "max relative gradient error exceeds 1e-5");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d instances, max relative error %.3g", instances,
                  max_err);
    if (check.ok) {
        check.detail = buf;
    }
    return check;
}

// ---------------------------------------------------------------------------
// 5. End-to-end learnability at desk scale.
// ---------------------------------------------------------------------------
Check criterion_learnability(double* seconds_budget) {
    *seconds_budget = 600.0;
    Check check;
    RunConfig cfg;  // defaults: 256-video 16x32x32 corpus, M=2, queue 256, 30 epochs
    const std::uint64_t seed = 0;
    const std::vector<Clip> corpus =
        generate_corpus_clips(corpus_spec_from(cfg, derive_seed(seed, "corpus")));
    const ModeResult result =
        run_mode(corpus, cfg, "nonlinear+rotation", seed, 256, 128, /*jobs=*/1);
    check.require(result.retrieval.top1 >= 0.078,
                  "top-1 below the 10x-chance floor of 0.078");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "top1 %.4f (floor 0.078), top5 %.4f",
                  result.retrieval.top1, result.retrieval.top5);
    if (check.ok) {
        check.detail = buf;
    }
    return check;
}

// ---------------------------------------------------------------------------
// 6. Ablation trend analog under the ablate command, one shared seed.
// ---------------------------------------------------------------------------
Check criterion_ablation(double* seconds_budget) {
    *seconds_budget = 2700.0;
    Check check;
    const fs::path out = scratch_dir("ablate");
    const int status = cli_run({"ablate", "--seed", "0", "--out", out.string(),
                                "--eval-count", "128", "--jobs", "4"});
    check.require(status == 0, "ablate command failed");
    if (!check.ok) {
        return check;
    }
    std::map<std::string, double> top1;
    std::istringstream csv(file_bytes(out / "ablate.csv"));
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            continue;
        }
        top1[line.substr(0, c1)] = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    }
    for (const char* mode : {"static", "linear", "nonlinear", "nonlinear+rotation",
                             "scaled-crop-control"}) {
        check.require(top1.count(mode) == 1, std::string("missing mode ") + mode);
    }
    if (!check.ok) {
        return check;
    }
    check.require(top1["static"] < top1["nonlinear"],
                  "expected static < nonlinear");
    check.require(top1["nonlinear"] <= top1["nonlinear+rotation"],
                  "expected nonlinear <= nonlinear+rotation");
    check.require(top1["scaled-crop-control"] < top1["nonlinear+rotation"],
                  "expected scaled-crop-control < nonlinear+rotation");
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "static %.4f < nonlinear %.4f <= +rotation %.4f; control %.4f",
                  top1["static"], top1["nonlinear"], top1["nonlinear+rotation"],
                  top1["scaled-crop-control"]);
    if (check.ok) {
        check.detail = buf;
    }
    return check;
}

// ---------------------------------------------------------------------------
// 7. Determinism: two identical pairs + train runs are bit-identical.
// ---------------------------------------------------------------------------
Check criterion_determinism(double* seconds_budget) {
    *seconds_budget = 600.0;
    Check check;
    std::vector<fs::path> pair_dirs, train_dirs;
    for (int run = 0; run < 2; ++run) {
        const fs::path pairs = scratch_dir("det_pairs_" + std::to_string(run));
        const fs::path train = scratch_dir("det_train_" + std::to_string(run));
        pair_dirs.push_back(pairs);
        train_dirs.push_back(train);
        int status = cli_run({"pairs", "--mode", "tubelet", "--count", "16", "--out",
                              pairs.string(), "--seed", "77", "--jobs", "1"});
        check.require(status == 0, "pairs command failed");
        status = cli_run({"train", "--pairs", pairs.string(), "--epochs", "3",
                          "--queue", "16", "--out", train.string(), "--seed", "77",
                          "--jobs", "1"});
        check.require(status == 0, "train command failed");
        if (!check.ok) {
            return check;
        }
    }
    check.require(file_bytes(pair_dirs[0] / "pairs.jsonl") ==
                      file_bytes(pair_dirs[1] / "pairs.jsonl"),
                  "pairs.jsonl differs between runs");
    for (int i = 0; i < 16; ++i) {
        char a[32], b[32];
        std::snprintf(a, sizeof(a), "pair_%06d_a.tbc", i);
        std::snprintf(b, sizeof(b), "pair_%06d_b.tbc", i);
        check.require(file_bytes(pair_dirs[0] / a) == file_bytes(pair_dirs[1] / a),
                      "pair clip A differs between runs");
        check.require(file_bytes(pair_dirs[0] / b) == file_bytes(pair_dirs[1] / b),
                      "pair clip B differs between runs");
    }
    check.require(file_bytes(train_dirs[0] / "checkpoint.tbck") ==
                      file_bytes(train_dirs[1] / "checkpoint.tbck"),
                  "checkpoints differ between runs");
    check.require(file_bytes(train_dirs[0] / "history.csv") ==
                      file_bytes(train_dirs[1] / "history.csv"),
                  "history files differ between runs");
    if (check.ok) {
        check.detail = "datasets, checkpoints and histories bit-identical";
    }
    return check;
}

// ---------------------------------------------------------------------------
// 8. Format conformance: golden round-trips and every documented error case.
// ---------------------------------------------------------------------------
Check criterion_formats(double* seconds_budget) {
    *seconds_budget = 30.0;
    Check check;
    const fs::path dir = scratch_dir("formats");

    const Clip clip = gen_clip(ClipKind::kDriftingBlobs, 4, 12, 10, 2024);
    write_clip(clip, dir / "c.tbc");
    check.require(read_clip(dir / "c.tbc").pixels == clip.pixels,
                  "clip round-trip not bit-exact");
    check.require(fs::file_size(dir / "c.tbc") == 18u + 4u * 12u * 10u * 3u,
                  "clip file size must be 18 header bytes plus payload");

    auto expect_error = [&](auto&& fn, const char* what) {
        try {
            fn();
            check.require(false, std::string("expected error: ") + what);
        } catch (const Error&) {
        }
    };
    std::string bytes = file_bytes(dir / "c.tbc");
    auto write_variant = [&](const std::string& name, std::string data) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
    };
    {
        std::string bad = bytes;
        bad[0] = 'Z';
        write_variant("bad_magic.tbc", bad);
        bool right_type = false;
        try {
            read_clip(dir / "bad_magic.tbc");
        } catch (const BadMagicError&) {
            right_type = true;
        } catch (const Error&) {
        }
        check.require(right_type, "bad magic must raise the bad-magic error");
    }
    {
        std::string bad = bytes;
        bad[4] = 9;
        write_variant("bad_version.tbc", bad);
        bool right_type = false;
        try {
            read_clip(dir / "bad_version.tbc");
        } catch (const VersionMismatchError&) {
            right_type = true;
        } catch (const Error&) {
        }
        check.require(right_type, "version mismatch must raise the version error");
    }
    {
        std::string bad = bytes.substr(0, bytes.size() - 1);
        write_variant("trunc.tbc", bad);
        bool right_type = false;
        try {
            read_clip(dir / "trunc.tbc");
        } catch (const TruncatedPayloadError&) {
            right_type = true;
        } catch (const Error&) {
        }
        check.require(right_type, "truncation must raise the truncated-payload error");
    }

    EncoderConfig ecfg;
    ecfg.grid_t = 2;
    ecfg.grid_h = 2;
    ecfg.grid_w = 2;
    ecfg.hidden = 4;
    ecfg.embed = 3;
    const EncoderParams params = init_encoder(ecfg, 55);
    write_checkpoint(params, dir / "p.tbck");
    const EncoderParams back = read_checkpoint(dir / "p.tbck");
    bool ckpt_equal = back.layer_count() == params.layer_count();
    for (int l = 0; ckpt_equal && l < params.layer_count(); ++l) {
        ckpt_equal = back.weights[l].a == params.weights[l].a &&
                     back.biases[l] == params.biases[l];
    }
    check.require(ckpt_equal, "checkpoint round-trip not bit-exact");
    expect_error([&] { read_checkpoint(dir / "c.tbc"); }, "clip fed to checkpoint reader");

    std::vector<CorpusEntry> entries(2);
    entries[0] = {"a", "a.tbc", ClipKind::kUniformNoise, 1, 4, 8, 8};
    entries[1] = {"b", "b.tbc", ClipKind::kStaticTexture, 2, 4, 8, 8};
    write_corpus_manifest(entries, dir / "m.jsonl");
    check.require(read_corpus_manifest(dir / "m.jsonl").size() == 2,
                  "manifest round-trip lost records");
    entries[1].id = "a";
    write_corpus_manifest(entries, dir / "dup.jsonl");
    expect_error([&] { read_corpus_manifest(dir / "dup.jsonl"); },
                 "duplicate manifest id");

    const RunConfig defaults = parse_config_text("", "(acceptance)");
    check.require(defaults.train.temperature == 0.2 && defaults.pair.tubelets == 2 &&
                      defaults.motion.keyframes == 3 && defaults.motion.oversample == 48 &&
                      defaults.motion.sigma == 8.0 && defaults.motion.delta_min == 40.0 &&
                      defaults.motion.delta_max == 80.0,
                  "empty config must yield the reference defaults");
    try {
        parse_config_text(R"({"train": {"taus": 0.1}})", "(acceptance)");
        check.require(false, "unknown key must be rejected");
    } catch (const ConfigConstraintError& e) {
        check.require(std::string(e.what()).find("taus") != std::string::npos,
                      "unknown-key rejection must name the key");
    }
    try {
        parse_config_text(R"({"train": {"temperature": -1}})", "(acceptance)");
        check.require(false, "negative temperature must be rejected");
    } catch (const ConfigConstraintError& e) {
        check.require(std::string(e.what()).find("train.temperature") !=
                          std::string::npos,
                      "constraint violation must carry the key path");
    }
    expect_error([&] { parse_config_text("{oops", "(acceptance)"); },
                 "malformed config");

    // Checked-in golden files.
    const fs::path golden = fs::path(TUBELET_GOLDEN_DIR);
    const Clip gclip = read_clip(golden / "reference.tbc");
    std::istringstream expected(file_bytes(golden / "reference_pixels.txt"));
    int t = 0, hh = 0, ww = 0;
    expected >> t >> hh >> ww;
    bool golden_ok = gclip.frames == t && gclip.height == hh && gclip.width == ww;
    for (std::size_t i = 0; golden_ok && i < gclip.pixels.size(); ++i) {
        int v = -1;
        expected >> v;
        golden_ok = static_cast<int>(gclip.pixels[i]) == v;
    }
    check.require(golden_ok, "golden clip decode mismatch");
    const EncoderParams gparams = read_checkpoint(golden / "reference.tbck");
    EncoderConfig gcfg;
    gcfg.grid_t = 2;
    gcfg.grid_h = 2;
    gcfg.grid_w = 2;
    gcfg.hidden = 4;
    gcfg.embed = 3;
    const EncoderParams gexpected = init_encoder(gcfg, 424242);
    bool gparams_ok = gparams.layer_count() == gexpected.layer_count();
    for (int l = 0; gparams_ok && l < gparams.layer_count(); ++l) {
        gparams_ok = gparams.weights[l].a == gexpected.weights[l].a;
    }
    check.require(gparams_ok, "golden checkpoint decode mismatch");

    if (check.ok) {
        check.detail = "round-trips, error taxonomy, defaults, golden files";
    }
    return check;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Check(double*)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "shared-tubelet invariant (200 pairs, all modes)", criterion_shared_tubelet},
        {2, "trajectory suite (100 seeds each)", criterion_trajectories},
        {3, "InfoNCE closed forms and invariances", criterion_infonce},
        {4, "analytic vs finite-difference gradients", criterion_gradients},
        {5, "end-to-end learnability (desk scale)", criterion_learnability},
        {6, "ablation trend analog (ablate command)", criterion_ablation},
        {7, "bit-exact determinism (pairs + train)", criterion_determinism},
        {8, "format conformance and golden files", criterion_formats},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        double budget = 0.0;
        const auto started = std::chrono::steady_clock::now();
        Check check;
        try {
            check = c.run(&budget);
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                .count();
        if (elapsed > budget && check.ok) {
            check.ok = false;
            check.detail = "runtime budget exceeded";
        }
        std::printf("%s  criterion %d: %s (%.1fs)%s%s\n", check.ok ? "PASS" : "FAIL",
                    c.id, c.name, elapsed, check.detail.empty() ? "" : " - ",
                    check.detail.c_str());
        std::fflush(stdout);
        if (!check.ok) {
            ++failures;
        }
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 8 criteria passed\n");
    return 0;
}
