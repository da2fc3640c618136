#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tubelet/config.hpp"
#include "tubelet/contrastive.hpp"

namespace tubelet {

// Builds `count` pair samples from the corpus clips. Pair i draws two
// distinct video indices and a pair seed derived from (seed, "pair", i), so
// the result is independent of scheduling order.
std::vector<PairSample> build_pair_dataset(const std::vector<Clip>& corpus,
                                           const RunConfig& cfg, const PairMode& mode,
                                           int count, std::uint64_t seed, int jobs = 1);

// The two distinct corpus indices a pair with this seed draws from.
std::pair<int, int> pick_pair_videos(std::uint64_t pair_seed, int corpus_size);

struct PairRecord {
    std::string id;
    std::uint64_t seed = 0;
    std::string clip_a;
    std::string clip_b;
    int video_a = 0;
    int video_b = 0;
};

struct PairDatasetInfo {
    std::string mode = "tubelet";
    std::uint64_t seed = 0;
    int count = 0;
    RunConfig config;
};

// On-disk pair dataset: clips in the container format plus pairs.jsonl (a
// header record carrying mode, seed, count and the full config, then one
// record per pair).
void write_pair_dataset(const std::vector<PairSample>& dataset,
                        const PairDatasetInfo& info,
                        const std::filesystem::path& out_dir);

struct LoadedPairDataset {
    PairDatasetInfo info;
    std::vector<PairRecord> records;
    // Clips only; specs and masks are regenerated from the record seeds when
    // needed.
    std::vector<PairSample> samples;
};

LoadedPairDataset load_pair_dataset(const std::filesystem::path& dir);

struct ModeResult {
    std::string mode;
    RetrievalResult retrieval;
    double final_loss = 0.0;
    double seconds = 0.0;
};

// One end-to-end leg: build train pairs in the given mode, train, build
// held-out eval pairs (separate seed stream) and run retrieval.
ModeResult run_mode(const std::vector<Clip>& corpus, const RunConfig& cfg,
                    const std::string& mode_name, std::uint64_t seed, int train_count,
                    int eval_count, int jobs, TrainResult* train_out = nullptr);

// The ablation matrix, each mode trained with the same seed and corpus.
std::vector<ModeResult> run_ablation(const std::vector<Clip>& corpus,
                                     const RunConfig& cfg,
                                     const std::vector<std::string>& modes,
                                     std::uint64_t seed, int train_count,
                                     int eval_count, int jobs);

void write_ablation_csv(const std::vector<ModeResult>& results,
                        const std::filesystem::path& path);

}  // namespace tubelet
