#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tubelet/compositor.hpp"
#include "tubelet/contrastive.hpp"
#include "tubelet/synthcorpus.hpp"

namespace tubelet {

// Full run configuration tree. Defaults are the reference hyperparameters:
// τ = 0.2, M = 2 tubelets, K = 3 keyframes, N = 48, σ = 8, Δ = [40, 80] at
// the 112-pixel reference scale, SGD momentum 0.9 / lr 0.01 / weight decay
// 1e-4, cosine schedule, queue 256, desk-scale 16×32×32 clips.
struct RunConfig {
    struct Motion {
        std::string kind = "nonlinear";
        int keyframes = 3;       // K
        int oversample = 48;     // N
        double sigma = 8.0;
        double delta_min = 40.0;  // reference scale
        double delta_max = 80.0;
    } motion;

    struct Transform {
        std::string kind = "rotation";
        int keyframes = 3;
        Interval scale{0.5, 1.5};
        Interval rotation{-90.0, 90.0};
        Interval shear{-1.0, 1.0};
    } transform;

    struct Augment {
        Interval crop_scale{0.4, 1.0};
        double flip_probability = 0.5;
        Interval jitter{0.6, 1.4};
        int out_height = 32;
        int out_width = 32;
    } augment;

    struct Pair {
        int tubelets = 2;          // M
        double patch_min = 16.0;   // reference scale
        double patch_max = 64.0;
        double reference_size = 112.0;
    } pair;

    struct Train {
        double temperature = 0.2;  // τ
        double learning_rate = 0.01;
        double momentum = 0.9;
        double weight_decay = 0.0001;
        double key_momentum = 0.999;
        int batch_size = 32;
        int epochs = 30;
        int queue = 256;
        int grid_t = 8;
        int grid_h = 8;
        int grid_w = 8;
        int hidden = 256;
        int embed = 128;
    } train;

    struct Corpus {
        int count = 256;
        int frames = 16;
        int height = 32;
        int width = 32;
        std::vector<std::pair<std::string, double>> kinds = {
            {"uniform-noise", 1.0},
            {"moving-gradient", 1.0},
            {"drifting-blobs", 1.0},
            {"static-texture", 1.0},
        };
    } corpus;
};

// Pair-generation mode selecting the motion/transform combination (or the
// scaled-crop control pipeline).
struct PairMode {
    MotionKind motion = MotionKind::kNonlinear;
    TransformKind transform = TransformKind::kRotation;
    bool control = false;
};

PairMode pair_mode_from_string(const std::string& name, const RunConfig& cfg);

// Parses the JSON config file, fills defaults for everything absent, rejects
// unknown keys and constraint violations. An empty file yields the defaults.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Serializes the full tree; parse_config_text(run_config_to_json(cfg), ...)
// round-trips.
std::string run_config_to_json(const RunConfig& cfg);

// Validates a fully-populated config (also called by parse_config).
void validate_config(const RunConfig& cfg);

PairConfig pair_config_from(const RunConfig& cfg, const PairMode& mode);
TrainConfig train_config_from(const RunConfig& cfg, std::uint64_t seed);
CorpusSpec corpus_spec_from(const RunConfig& cfg, std::uint64_t seed);

}  // namespace tubelet
