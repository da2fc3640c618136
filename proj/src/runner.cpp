#include "tubelet/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tubelet/error.hpp"
#include "tubelet/log.hpp"
#include "tubelet/rng.hpp"
#include "tubelet/storage.hpp"

namespace tubelet {

namespace {

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<int> next{0};
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                fn(i);
            }
        });
    }
    for (std::thread& t : workers) {
        t.join();
    }
}

}  // namespace

std::pair<int, int> pick_pair_videos(std::uint64_t pair_seed, int corpus_size) {
    Rng rng(derive_seed(pair_seed, "videos"));
    const int a = static_cast<int>(rng.uniform_int(0, corpus_size - 1));
    int b = static_cast<int>(rng.uniform_int(0, corpus_size - 2));
    if (b >= a) {
        ++b;
    }
    return {a, b};
}

std::vector<PairSample> build_pair_dataset(const std::vector<Clip>& corpus,
                                           const RunConfig& cfg, const PairMode& mode,
                                           int count, std::uint64_t seed, int jobs) {
    if (corpus.size() < 2) {
        throw InvalidInputError("pair dataset: corpus must hold at least 2 videos");
    }
    if (count < 1) {
        throw InvalidConfigError("pair dataset: count must be >= 1");
    }
    const PairConfig pc = pair_config_from(cfg, mode);
    std::vector<PairSample> dataset(count);
    parallel_for(count, jobs, [&](int i) {
        const std::uint64_t pair_seed = derive_seed(seed, "pair", static_cast<std::uint64_t>(i));
        const auto [a, b] = pick_pair_videos(pair_seed, static_cast<int>(corpus.size()));
        dataset[i] = mode.control
                         ? make_scaled_crop_control(corpus[a], corpus[b], pc, pair_seed)
                         : make_pair(corpus[a], corpus[b], pc, pair_seed);
    });
    return dataset;
}

void write_pair_dataset(const std::vector<PairSample>& dataset,
                        const PairDatasetInfo& info,
                        const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::string manifest;
    nlohmann::json header = {
        {"type", "header"},
        {"mode", info.mode},
        {"seed", info.seed},
        {"count", static_cast<int>(dataset.size())},
        {"config", nlohmann::json::parse(run_config_to_json(info.config))},
    };
    manifest += header.dump();
    manifest += '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        char id[24];
        std::snprintf(id, sizeof(id), "pair_%06zu", i);
        const std::string clip_a = std::string(id) + "_a.tbc";
        const std::string clip_b = std::string(id) + "_b.tbc";
        write_clip(dataset[i].clip_a, out_dir / clip_a);
        write_clip(dataset[i].clip_b, out_dir / clip_b);
        nlohmann::json record = {
            {"id", id},
            {"seed", dataset[i].seed},
            {"clip_a", clip_a},
            {"clip_b", clip_b},
        };
        manifest += record.dump();
        manifest += '\n';
    }
    std::ofstream out(out_dir / "pairs.jsonl", std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + (out_dir / "pairs.jsonl").string());
    }
    out << manifest;
}

LoadedPairDataset load_pair_dataset(const std::filesystem::path& dir) {
    const std::filesystem::path manifest_path = dir / "pairs.jsonl";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + manifest_path.string());
    }
    LoadedPairDataset loaded;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(manifest_path.string() + ":" + std::to_string(line_no) +
                              ": " + e.what());
        }
        if (!have_header) {
            if (record.value("type", "") != "header") {
                throw FormatError(manifest_path.string() + ": first record must be the header");
            }
            loaded.info.mode = record.at("mode").get<std::string>();
            loaded.info.seed = record.at("seed").get<std::uint64_t>();
            loaded.info.count = record.at("count").get<int>();
            loaded.info.config =
                parse_config_text(record.at("config").dump(), manifest_path.string());
            have_header = true;
            continue;
        }
        PairRecord pr;
        pr.id = record.at("id").get<std::string>();
        pr.seed = record.at("seed").get<std::uint64_t>();
        pr.clip_a = record.at("clip_a").get<std::string>();
        pr.clip_b = record.at("clip_b").get<std::string>();
        PairSample sample;
        sample.seed = pr.seed;
        sample.clip_a = read_clip(dir / pr.clip_a);
        sample.clip_b = read_clip(dir / pr.clip_b);
        loaded.records.push_back(std::move(pr));
        loaded.samples.push_back(std::move(sample));
    }
    if (!have_header) {
        throw FormatError(manifest_path.string() + ": missing header record");
    }
    return loaded;
}

ModeResult run_mode(const std::vector<Clip>& corpus, const RunConfig& cfg,
                    const std::string& mode_name, std::uint64_t seed, int train_count,
                    int eval_count, int jobs, TrainResult* train_out) {
    const auto started = std::chrono::steady_clock::now();
    const PairMode mode = pair_mode_from_string(mode_name, cfg);

    log_info("[" + mode_name + "] building " + std::to_string(train_count) +
             " training pairs");
    const std::vector<PairSample> train_pairs = build_pair_dataset(
        corpus, cfg, mode, train_count, derive_seed(seed, "train-pairs"), jobs);

    log_info("[" + mode_name + "] training " + std::to_string(cfg.train.epochs) +
             " epochs");
    TrainResult trained = train(train_pairs, train_config_from(cfg, seed));

    log_info("[" + mode_name + "] building " + std::to_string(eval_count) +
             " held-out pairs");
    const std::vector<PairSample> eval_pairs = build_pair_dataset(
        corpus, cfg, mode, eval_count, derive_seed(seed, "eval-pairs"), jobs);

    ModeResult result;
    result.mode = mode_name;
    result.retrieval = retrieval_eval(trained.params, eval_pairs);
    result.final_loss = trained.history.empty() ? 0.0 : trained.history.back().mean_loss;
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                   started)
                         .count();
    log_info("[" + mode_name + "] top1 " + std::to_string(result.retrieval.top1) +
             ", top5 " + std::to_string(result.retrieval.top5));
    if (train_out != nullptr) {
        *train_out = std::move(trained);
    }
    return result;
}

std::vector<ModeResult> run_ablation(const std::vector<Clip>& corpus,
                                     const RunConfig& cfg,
                                     const std::vector<std::string>& modes,
                                     std::uint64_t seed, int train_count,
                                     int eval_count, int jobs) {
    std::vector<ModeResult> results;
    results.reserve(modes.size());
    for (const std::string& mode : modes) {
        results.push_back(
            run_mode(corpus, cfg, mode, seed, train_count, eval_count, jobs));
    }
    return results;
}

void write_ablation_csv(const std::vector<ModeResult>& results,
                        const std::filesystem::path& path) {
    std::string out = "mode,top1,top5,final_loss,seconds\n";
    char buf[160];
    for (const ModeResult& r : results) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.2f\n", r.mode.c_str(),
                      r.retrieval.top1, r.retrieval.top5, r.final_loss, r.seconds);
        out += buf;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    f << out;
}

}  // namespace tubelet
