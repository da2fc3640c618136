#include "tubelet/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "tubelet/config.hpp"
#include "tubelet/contrastive.hpp"
#include "tubelet/error.hpp"
#include "tubelet/log.hpp"
#include "tubelet/rng.hpp"
#include "tubelet/runner.hpp"
#include "tubelet/storage.hpp"
#include "tubelet/synthcorpus.hpp"

namespace tubelet {

namespace {

namespace fs = std::filesystem;

// Shared flags; command line overrides config file overrides built-in
// defaults.
struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    int jobs = 1;
    std::optional<int> count;
    std::optional<int> epochs;
    std::optional<int> queue;
    std::optional<double> tau;
    std::optional<int> tubelets;  // --m
    std::string mode = "tubelet";

    RunConfig load_config() const {
        RunConfig cfg;
        if (!config_path.empty()) {
            cfg = parse_config(config_path);
        }
        if (epochs) cfg.train.epochs = *epochs;
        if (queue) cfg.train.queue = *queue;
        if (tau) cfg.train.temperature = *tau;
        if (tubelets) cfg.pair.tubelets = *tubelets;
        validate_config(cfg);
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Config file (JSON)");
    cmd->add_option("--seed", args.seed, "Root seed")->capture_default_str();
    cmd->add_option("--jobs", args.jobs, "Worker threads (1 = fully sequential)")
        ->capture_default_str();
}

std::vector<Clip> corpus_for(const CommonArgs& args, const RunConfig& cfg,
                             const std::string& corpus_dir) {
    if (!corpus_dir.empty()) {
        return load_corpus(fs::path(corpus_dir) / "manifest.jsonl");
    }
    log_info("no --corpus given, generating clips in memory");
    return generate_corpus_clips(corpus_spec_from(cfg, derive_seed(args.seed, "corpus")));
}

const std::vector<std::string> kAblateModes = {
    "static", "linear", "nonlinear", "nonlinear+rotation", "scaled-crop-control"};

int cmd_corpus(const CommonArgs& args) {
    const RunConfig cfg = args.load_config();
    CorpusSpec spec = corpus_spec_from(cfg, derive_seed(args.seed, "corpus"));
    if (args.count) {
        spec.count = *args.count;
    }
    const auto entries = build_corpus(spec, args.out_dir, args.jobs);
    std::cout << "wrote " << entries.size() << " clips to " << args.out_dir << "\n";
    return 0;
}

struct TrajArgs {
    std::string kind;
    int count = 5;
    std::optional<int> oversample;
    std::optional<double> sigma;
    std::optional<int> keyframes;
    int width = 112;
    int height = 112;
};

int cmd_traj(const CommonArgs& args, const TrajArgs& traj) {
    RunConfig cfg = args.load_config();
    if (!traj.kind.empty()) cfg.motion.kind = traj.kind;
    if (traj.oversample) cfg.motion.oversample = *traj.oversample;
    if (traj.sigma) cfg.motion.sigma = *traj.sigma;
    if (traj.keyframes) cfg.motion.keyframes = *traj.keyframes;

    const PairMode mode = pair_mode_from_string(cfg.motion.kind, cfg);
    const PairConfig pc = pair_config_from(cfg, mode);
    MotionConfig mcfg;
    mcfg.kind = mode.motion;
    mcfg.frames = cfg.corpus.frames;
    mcfg.width = traj.width;
    mcfg.height = traj.height;
    mcfg.keyframes = cfg.motion.keyframes;
    mcfg.delta_min = pc.delta_min_px(traj.height, traj.width);
    mcfg.delta_max = pc.delta_max_px(traj.height, traj.width);
    mcfg.oversample = cfg.motion.oversample;
    mcfg.sigma = cfg.motion.sigma;

    std::vector<Trajectory> trajectories;
    for (int i = 0; i < traj.count; ++i) {
        trajectories.push_back(
            make_trajectory(mcfg, derive_seed(args.seed, "traj", static_cast<std::uint64_t>(i))));
    }
    fs::create_directories(args.out_dir);
    const fs::path path = fs::path(args.out_dir) / "trajectories.ppm";
    render_trajectory_plot(trajectories, traj.width, traj.height, path);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_pairs(const CommonArgs& args, const std::string& corpus_dir, bool verify) {
    const RunConfig cfg = args.load_config();
    const std::vector<Clip> corpus = corpus_for(args, cfg, corpus_dir);
    const PairMode mode = pair_mode_from_string(args.mode, cfg);
    const int count = args.count.value_or(10);
    const std::uint64_t dataset_seed = derive_seed(args.seed, "pairs");
    const std::vector<PairSample> dataset =
        build_pair_dataset(corpus, cfg, mode, count, dataset_seed, args.jobs);

    PairDatasetInfo info;
    info.mode = args.mode;
    info.seed = dataset_seed;
    info.count = count;
    info.config = cfg;
    write_pair_dataset(dataset, info, args.out_dir);
    std::cout << "wrote " << count << " pairs to " << args.out_dir << "\n";

    if (verify) {
        const PairConfig pc = pair_config_from(cfg, mode);
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const auto [a, b] =
                pick_pair_videos(dataset[i].seed, static_cast<int>(corpus.size()));
            const PairDetail detail =
                mode.control
                    ? make_scaled_crop_control_detailed(corpus[a], corpus[b], pc,
                                                        dataset[i].seed)
                    : make_pair_detailed(corpus[a], corpus[b], pc, dataset[i].seed);
            std::string why;
            if (!check_shared_tubelet_invariant(detail, &why)) {
                throw Error("pair " + std::to_string(i) + " fails invariant: " + why);
            }
        }
        std::cout << "all " << count << " pairs pass the shared-tubelet invariant\n";
    }
    return 0;
}

int cmd_train(const CommonArgs& args, const std::string& pairs_dir,
              const std::string& corpus_dir) {
    RunConfig cfg = args.load_config();
    std::vector<PairSample> dataset;
    if (!pairs_dir.empty()) {
        LoadedPairDataset loaded = load_pair_dataset(pairs_dir);
        dataset = std::move(loaded.samples);
    } else {
        const std::vector<Clip> corpus = corpus_for(args, cfg, corpus_dir);
        const PairMode mode = pair_mode_from_string(args.mode, cfg);
        const int count = args.count.value_or(cfg.corpus.count);
        dataset = build_pair_dataset(corpus, cfg, mode, count,
                                     derive_seed(args.seed, "train-pairs"), args.jobs);
    }
    log_info("training on " + std::to_string(dataset.size()) + " pairs");
    const TrainResult result = train(dataset, train_config_from(cfg, args.seed));
    fs::create_directories(args.out_dir);
    write_checkpoint(result.params, fs::path(args.out_dir) / "checkpoint.tbck");
    write_history_csv(result.history, fs::path(args.out_dir) / "history.csv");
    std::cout << "final mean loss " << result.history.back().mean_loss << ", wrote "
              << args.out_dir << "/checkpoint.tbck\n";
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& checkpoint,
             const std::string& pairs_dir, const std::string& corpus_dir) {
    const RunConfig cfg = args.load_config();
    const EncoderParams params = read_checkpoint(checkpoint);
    std::vector<PairSample> probes;
    if (!pairs_dir.empty()) {
        probes = std::move(load_pair_dataset(pairs_dir).samples);
    } else {
        const std::vector<Clip> corpus = corpus_for(args, cfg, corpus_dir);
        const PairMode mode = pair_mode_from_string(args.mode, cfg);
        const int count = args.count.value_or(128);
        probes = build_pair_dataset(corpus, cfg, mode, count,
                                    derive_seed(args.seed, "eval-pairs"), args.jobs);
    }
    const RetrievalResult r = retrieval_eval(params, probes);
    char line[64];
    std::snprintf(line, sizeof(line), "top1 %.6f\ntop5 %.6f\n", r.top1, r.top5);
    std::cout << line;
    return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& corpus_dir, int eval_count) {
    const RunConfig cfg = args.load_config();
    const std::vector<Clip> corpus = corpus_for(args, cfg, corpus_dir);
    const int train_count = args.count.value_or(cfg.corpus.count);
    const std::vector<ModeResult> results = run_ablation(
        corpus, cfg, kAblateModes, args.seed, train_count, eval_count, args.jobs);
    fs::create_directories(args.out_dir);
    write_ablation_csv(results, fs::path(args.out_dir) / "ablate.csv");
    char line[160];
    std::snprintf(line, sizeof(line), "%-22s %8s %8s %12s %9s\n", "mode", "top1",
                  "top5", "final_loss", "seconds");
    std::cout << line;
    for (const ModeResult& r : results) {
        std::snprintf(line, sizeof(line), "%-22s %8.4f %8.4f %12.4f %9.1f\n",
                      r.mode.c_str(), r.retrieval.top1, r.retrieval.top5, r.final_loss,
                      r.seconds);
        std::cout << line;
    }
    return 0;
}

int cmd_plot(const CommonArgs& args, const std::string& pairs_dir, int index) {
    const LoadedPairDataset loaded = load_pair_dataset(pairs_dir);
    if (index < 0 || index >= static_cast<int>(loaded.records.size())) {
        throw InvalidInputError("plot: pair index out of range");
    }
    const RunConfig& cfg = loaded.info.config;
    const PairMode mode = pair_mode_from_string(loaded.info.mode, cfg);
    const PairConfig pc = pair_config_from(cfg, mode);
    const PairSample& sample = loaded.samples[index];

    // Trajectories, tracks and shape masks depend only on the pair seed and
    // clip dimensions; the stored clip works as the patch source.
    std::vector<TubeletSpec> specs;
    const std::vector<RenderedTubelet> rendered =
        rebuild_pair_tubelets(sample.clip_a, pc, sample.seed, mode.control, &specs);
    if (specs.empty()) {
        throw InvalidInputError("plot: pair has no tubelets");
    }

    fs::create_directories(args.out_dir);
    std::vector<Trajectory> trajectories;
    for (const TubeletSpec& spec : specs) {
        trajectories.push_back(spec.trajectory);
    }
    const fs::path traj_path =
        fs::path(args.out_dir) / (loaded.records[index].id + "_trajectories.ppm");
    render_trajectory_plot(trajectories, sample.clip_a.width, sample.clip_a.height,
                           traj_path);
    for (std::size_t j = 0; j < rendered.size(); ++j) {
        const fs::path mask_path =
            fs::path(args.out_dir) /
            (loaded.records[index].id + "_masks_" + std::to_string(j) + ".ppm");
        render_mask_strip(rendered[j], mask_path);
    }
    std::cout << "wrote plots for " << loaded.records[index].id << " to "
              << args.out_dir << "\n";
    return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
    CLI::App app{"Synthetic moving-patch (tubelet) pipeline: corpus generation, "
                 "pair construction, momentum-contrastive training and retrieval "
                 "evaluation"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    CommonArgs common;

    auto* corpus_cmd = app.add_subcommand("corpus", "Generate a background clip corpus");
    add_common(corpus_cmd, common);
    corpus_cmd->add_option("--out", common.out_dir, "Output directory")->required();
    int corpus_count = 0;
    corpus_cmd->add_option("--count", corpus_count, "Number of clips (default from config)");

    auto* traj_cmd = app.add_subcommand("traj", "Generate and plot trajectories");
    TrajArgs traj;
    add_common(traj_cmd, common);
    traj_cmd->add_option("--out", common.out_dir, "Output directory")->required();
    traj_cmd->add_option("--kind", traj.kind, "static | linear | nonlinear");
    traj_cmd->add_option("--count", traj.count, "Trajectories per plot")
        ->capture_default_str();
    int traj_n = 0;
    double traj_sigma = 0.0;
    int traj_k = 0;
    traj_cmd->add_option("--n", traj_n, "Oversample count (default 48)");
    traj_cmd->add_option("--sigma", traj_sigma, "Smoothing factor (default 8)");
    traj_cmd->add_option("--k", traj_k, "Keyframes (default 3)");
    traj_cmd->add_option("--width", traj.width, "Plot frame width")->capture_default_str();
    traj_cmd->add_option("--height", traj.height, "Plot frame height")
        ->capture_default_str();

    auto* pairs_cmd = app.add_subcommand("pairs", "Materialize a pair dataset");
    add_common(pairs_cmd, common);
    pairs_cmd->add_option("--out", common.out_dir, "Output directory")->required();
    pairs_cmd->add_option("--mode", common.mode,
                          "tubelet | static | linear | nonlinear | nonlinear+rotation "
                          "| scaled-crop-control")
        ->capture_default_str();
    int pairs_count = 0;
    pairs_cmd->add_option("--count", pairs_count, "Number of pairs (default 10)");
    int pairs_m = -1;
    pairs_cmd->add_option("--m", pairs_m, "Tubelets per pair (default 2)");
    std::string pairs_corpus;
    pairs_cmd->add_option("--corpus", pairs_corpus,
                          "Corpus directory (generated in memory when absent)");
    bool pairs_verify = false;
    pairs_cmd->add_flag("--verify", pairs_verify,
                        "Check the shared-tubelet invariant on every pair");

    auto* train_cmd = app.add_subcommand("train", "Contrastive training");
    add_common(train_cmd, common);
    train_cmd->add_option("--out", common.out_dir, "Output directory")->required();
    std::string train_pairs, train_corpus;
    train_cmd->add_option("--pairs", train_pairs, "Pair dataset directory");
    train_cmd->add_option("--corpus", train_corpus, "Corpus directory for on-the-fly pairs");
    train_cmd->add_option("--mode", common.mode, "Pair mode for on-the-fly generation")
        ->capture_default_str();
    int train_count = 0;
    train_cmd->add_option("--count", train_count, "On-the-fly pair count");
    int train_epochs = 0, train_queue = 0;
    double train_tau = 0.0;
    int train_m = -1;
    train_cmd->add_option("--epochs", train_epochs, "Epochs (default 30)");
    train_cmd->add_option("--queue", train_queue, "Negative queue capacity (default 256)");
    train_cmd->add_option("--tau", train_tau, "InfoNCE temperature (default 0.2)");
    train_cmd->add_option("--m", train_m, "Tubelets per pair (default 2)");

    auto* eval_cmd = app.add_subcommand("eval", "Retrieval evaluation on held-out pairs");
    add_common(eval_cmd, common);
    std::string eval_checkpoint, eval_pairs, eval_corpus;
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--pairs", eval_pairs, "Probe pair dataset directory");
    eval_cmd->add_option("--corpus", eval_corpus, "Corpus directory for on-the-fly probes");
    eval_cmd->add_option("--mode", common.mode, "Pair mode for on-the-fly probes")
        ->capture_default_str();
    int eval_count = 0;
    eval_cmd->add_option("--count", eval_count, "Probe count (default 128)");

    auto* ablate_cmd = app.add_subcommand(
        "ablate", "Train the mode matrix end-to-end and emit a comparison table");
    add_common(ablate_cmd, common);
    ablate_cmd->add_option("--out", common.out_dir, "Output directory")->required();
    std::string ablate_corpus;
    ablate_cmd->add_option("--corpus", ablate_corpus,
                           "Corpus directory (generated in memory when absent)");
    int ablate_count = 0;
    ablate_cmd->add_option("--count", ablate_count, "Training pairs per mode");
    int ablate_eval = 128;
    ablate_cmd->add_option("--eval-count", ablate_eval, "Held-out pairs per mode")
        ->capture_default_str();
    int ablate_epochs = 0, ablate_queue = 0;
    double ablate_tau = 0.0;
    int ablate_m = -1;
    ablate_cmd->add_option("--epochs", ablate_epochs, "Epochs (default 30)");
    ablate_cmd->add_option("--queue", ablate_queue, "Queue capacity (default 256)");
    ablate_cmd->add_option("--tau", ablate_tau, "Temperature (default 0.2)");
    ablate_cmd->add_option("--m", ablate_m, "Tubelets per pair (default 2)");

    auto* plot_cmd = app.add_subcommand("plot", "Render trajectories/masks from saved pairs");
    add_common(plot_cmd, common);
    plot_cmd->add_option("--out", common.out_dir, "Output directory")->required();
    std::string plot_pairs;
    plot_cmd->add_option("--pairs", plot_pairs, "Pair dataset directory")->required();
    int plot_index = 0;
    plot_cmd->add_option("--index", plot_index, "Pair index")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (corpus_cmd->parsed()) {
            if (corpus_cmd->count("--count")) common.count = corpus_count;
            return cmd_corpus(common);
        }
        if (traj_cmd->parsed()) {
            if (traj_cmd->count("--n")) traj.oversample = traj_n;
            if (traj_cmd->count("--sigma")) traj.sigma = traj_sigma;
            if (traj_cmd->count("--k")) traj.keyframes = traj_k;
            return cmd_traj(common, traj);
        }
        if (pairs_cmd->parsed()) {
            if (pairs_cmd->count("--count")) common.count = pairs_count;
            if (pairs_cmd->count("--m")) common.tubelets = pairs_m;
            return cmd_pairs(common, pairs_corpus, pairs_verify);
        }
        if (train_cmd->parsed()) {
            if (train_cmd->count("--count")) common.count = train_count;
            if (train_cmd->count("--epochs")) common.epochs = train_epochs;
            if (train_cmd->count("--queue")) common.queue = train_queue;
            if (train_cmd->count("--tau")) common.tau = train_tau;
            if (train_cmd->count("--m")) common.tubelets = train_m;
            return cmd_train(common, train_pairs, train_corpus);
        }
        if (eval_cmd->parsed()) {
            if (eval_cmd->count("--count")) common.count = eval_count;
            return cmd_eval(common, eval_checkpoint, eval_pairs, eval_corpus);
        }
        if (ablate_cmd->parsed()) {
            if (ablate_cmd->count("--count")) common.count = ablate_count;
            if (ablate_cmd->count("--epochs")) common.epochs = ablate_epochs;
            if (ablate_cmd->count("--queue")) common.queue = ablate_queue;
            if (ablate_cmd->count("--tau")) common.tau = ablate_tau;
            if (ablate_cmd->count("--m")) common.tubelets = ablate_m;
            return cmd_ablate(common, ablate_corpus, ablate_eval);
        }
        if (plot_cmd->parsed()) {
            return cmd_plot(common, plot_pairs, plot_index);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}

}  // namespace tubelet
