#include "tubelet/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tubelet/error.hpp"

namespace tubelet {

namespace {

using nlohmann::json;

[[noreturn]] void constraint(const std::string& key, const std::string& why) {
    throw ConfigConstraintError("config constraint violated at " + key + ": " + why);
}

// Walks one section, asserting every present key is known and pulling values.
class Section {
public:
    Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) {
            constraint(path_, "expected an object");
        }
    }

    template <typename T>
    void get(const char* key, T& out) {
        known_.insert(key);
        auto it = j_->find(key);
        if (it == j_->end()) {
            return;
        }
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            constraint(path_ + "." + key, "wrong value type");
        }
    }

    void get_interval(const char* key, Interval& out) {
        known_.insert(key);
        auto it = j_->find(key);
        if (it == j_->end()) {
            return;
        }
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() ||
            !(*it)[1].is_number()) {
            constraint(path_ + "." + key, "expected [lo, hi]");
        }
        out.lo = (*it)[0].get<double>();
        out.hi = (*it)[1].get<double>();
    }

    const json* subsection(const char* key) {
        known_.insert(key);
        auto it = j_->find(key);
        return it == j_->end() ? nullptr : &*it;
    }

    // Rejects any key not consumed above.
    void finish() const {
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            if (!known_.contains(it.key())) {
                throw ConfigConstraintError("unknown config key " + path_ + "." +
                                            it.key());
            }
        }
    }

private:
    const json* j_;
    std::string path_;
    std::set<std::string> known_;
};

void parse_motion(const json& j, RunConfig::Motion& m) {
    Section s(j, "motion");
    s.get("kind", m.kind);
    s.get("keyframes", m.keyframes);
    s.get("oversample", m.oversample);
    s.get("sigma", m.sigma);
    Interval delta{m.delta_min, m.delta_max};
    s.get_interval("delta", delta);
    m.delta_min = delta.lo;
    m.delta_max = delta.hi;
    s.finish();
}

void parse_transform(const json& j, RunConfig::Transform& t) {
    Section s(j, "transform");
    s.get("kind", t.kind);
    s.get("keyframes", t.keyframes);
    s.get_interval("scale", t.scale);
    s.get_interval("rotation", t.rotation);
    s.get_interval("shear", t.shear);
    s.finish();
}

void parse_augment(const json& j, RunConfig::Augment& a) {
    Section s(j, "augment");
    s.get_interval("crop_scale", a.crop_scale);
    s.get("flip_probability", a.flip_probability);
    s.get_interval("jitter", a.jitter);
    s.get("out_height", a.out_height);
    s.get("out_width", a.out_width);
    s.finish();
}

void parse_pair(const json& j, RunConfig::Pair& p) {
    Section s(j, "pair");
    s.get("tubelets", p.tubelets);
    Interval patch{p.patch_min, p.patch_max};
    s.get_interval("patch_size", patch);
    p.patch_min = patch.lo;
    p.patch_max = patch.hi;
    s.get("reference_size", p.reference_size);
    s.finish();
}

void parse_train(const json& j, RunConfig::Train& t) {
    Section s(j, "train");
    s.get("temperature", t.temperature);
    s.get("learning_rate", t.learning_rate);
    s.get("momentum", t.momentum);
    s.get("weight_decay", t.weight_decay);
    s.get("key_momentum", t.key_momentum);
    s.get("batch_size", t.batch_size);
    s.get("epochs", t.epochs);
    s.get("queue", t.queue);
    s.get("grid_t", t.grid_t);
    s.get("grid_h", t.grid_h);
    s.get("grid_w", t.grid_w);
    s.get("hidden", t.hidden);
    s.get("embed", t.embed);
    s.finish();
}

void parse_corpus(const json& j, RunConfig::Corpus& c) {
    Section s(j, "corpus");
    s.get("count", c.count);
    s.get("frames", c.frames);
    s.get("height", c.height);
    s.get("width", c.width);
    if (const json* kinds = s.subsection("kinds")) {
        if (!kinds->is_object()) {
            constraint("corpus.kinds", "expected an object of kind -> weight");
        }
        c.kinds.clear();
        for (auto it = kinds->begin(); it != kinds->end(); ++it) {
            if (!it.value().is_number()) {
                constraint("corpus.kinds." + it.key(), "weight must be a number");
            }
            c.kinds.emplace_back(it.key(), it.value().get<double>());
        }
    }
    s.finish();
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte_pos) {
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i < byte_pos && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

bool only_whitespace(const std::string& text) {
    return text.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    if (only_whitespace(text)) {
        validate_config(cfg);
        return cfg;
    }
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigParseError(origin + ":" + std::to_string(line) + ":" +
                               std::to_string(column) + ": " + e.what());
    }
    Section top(root, "(root)");
    if (const json* j = top.subsection("motion")) parse_motion(*j, cfg.motion);
    if (const json* j = top.subsection("transform")) parse_transform(*j, cfg.transform);
    if (const json* j = top.subsection("augment")) parse_augment(*j, cfg.augment);
    if (const json* j = top.subsection("pair")) parse_pair(*j, cfg.pair);
    if (const json* j = top.subsection("train")) parse_train(*j, cfg.train);
    if (const json* j = top.subsection("corpus")) parse_corpus(*j, cfg.corpus);
    top.finish();
    validate_config(cfg);
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    json kinds = json::object();
    for (const auto& [name, weight] : cfg.corpus.kinds) {
        kinds[name] = weight;
    }
    const json root = {
        {"motion",
         {{"kind", cfg.motion.kind},
          {"keyframes", cfg.motion.keyframes},
          {"oversample", cfg.motion.oversample},
          {"sigma", cfg.motion.sigma},
          {"delta", {cfg.motion.delta_min, cfg.motion.delta_max}}}},
        {"transform",
         {{"kind", cfg.transform.kind},
          {"keyframes", cfg.transform.keyframes},
          {"scale", {cfg.transform.scale.lo, cfg.transform.scale.hi}},
          {"rotation", {cfg.transform.rotation.lo, cfg.transform.rotation.hi}},
          {"shear", {cfg.transform.shear.lo, cfg.transform.shear.hi}}}},
        {"augment",
         {{"crop_scale", {cfg.augment.crop_scale.lo, cfg.augment.crop_scale.hi}},
          {"flip_probability", cfg.augment.flip_probability},
          {"jitter", {cfg.augment.jitter.lo, cfg.augment.jitter.hi}},
          {"out_height", cfg.augment.out_height},
          {"out_width", cfg.augment.out_width}}},
        {"pair",
         {{"tubelets", cfg.pair.tubelets},
          {"patch_size", {cfg.pair.patch_min, cfg.pair.patch_max}},
          {"reference_size", cfg.pair.reference_size}}},
        {"train",
         {{"temperature", cfg.train.temperature},
          {"learning_rate", cfg.train.learning_rate},
          {"momentum", cfg.train.momentum},
          {"weight_decay", cfg.train.weight_decay},
          {"key_momentum", cfg.train.key_momentum},
          {"batch_size", cfg.train.batch_size},
          {"epochs", cfg.train.epochs},
          {"queue", cfg.train.queue},
          {"grid_t", cfg.train.grid_t},
          {"grid_h", cfg.train.grid_h},
          {"grid_w", cfg.train.grid_w},
          {"hidden", cfg.train.hidden},
          {"embed", cfg.train.embed}}},
        {"corpus",
         {{"count", cfg.corpus.count},
          {"frames", cfg.corpus.frames},
          {"height", cfg.corpus.height},
          {"width", cfg.corpus.width},
          {"kinds", kinds}}},
    };
    return root.dump();
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(std::move(ss).str(), path.string());
}

void validate_config(const RunConfig& cfg) {
    motion_kind_from_string(cfg.motion.kind);  // throws on unknown
    if (cfg.motion.keyframes < 2) {
        constraint("motion.keyframes", "must be >= 2");
    }
    if (cfg.motion.oversample < 1) {
        constraint("motion.oversample", "must be >= 1");
    }
    if (cfg.motion.sigma <= 0.0) {
        constraint("motion.sigma", "must be positive");
    }
    if (cfg.motion.delta_min <= 0.0 || cfg.motion.delta_min > cfg.motion.delta_max) {
        constraint("motion.delta", "must satisfy 0 < lo <= hi");
    }
    transform_kind_from_string(cfg.transform.kind);
    if (cfg.transform.keyframes < 2) {
        constraint("transform.keyframes", "must be >= 2");
    }
    const std::pair<const char*, Interval> transform_ranges[] = {
        {"transform.scale", cfg.transform.scale},
        {"transform.rotation", cfg.transform.rotation},
        {"transform.shear", cfg.transform.shear},
    };
    for (const auto& [name, iv] : transform_ranges) {
        if (iv.lo > iv.hi) {
            constraint(name, "must satisfy lo <= hi");
        }
    }
    if (cfg.augment.crop_scale.lo <= 0.0 ||
        cfg.augment.crop_scale.lo > cfg.augment.crop_scale.hi ||
        cfg.augment.crop_scale.hi > 1.0) {
        constraint("augment.crop_scale", "must satisfy 0 < lo <= hi <= 1");
    }
    if (cfg.augment.flip_probability < 0.0 || cfg.augment.flip_probability > 1.0) {
        constraint("augment.flip_probability", "must lie in [0, 1]");
    }
    if (cfg.augment.jitter.lo <= 0.0 || cfg.augment.jitter.lo > cfg.augment.jitter.hi) {
        constraint("augment.jitter", "must satisfy 0 < lo <= hi");
    }
    if (cfg.augment.out_height < 1 || cfg.augment.out_width < 1) {
        constraint("augment.out_height/out_width", "must be positive");
    }
    if (cfg.pair.tubelets < 0) {
        constraint("pair.tubelets", "must be >= 0");
    }
    if (cfg.pair.patch_min < 1.0 || cfg.pair.patch_min > cfg.pair.patch_max) {
        constraint("pair.patch_size", "must satisfy 1 <= lo <= hi");
    }
    if (cfg.pair.reference_size <= 0.0) {
        constraint("pair.reference_size", "must be positive");
    }
    if (cfg.train.temperature <= 0.0) {
        constraint("train.temperature", "must be positive");
    }
    if (cfg.train.learning_rate < 0.0) {
        constraint("train.learning_rate", "must be >= 0");
    }
    if (cfg.train.momentum < 0.0 || cfg.train.momentum >= 1.0) {
        constraint("train.momentum", "must lie in [0, 1)");
    }
    if (cfg.train.weight_decay < 0.0) {
        constraint("train.weight_decay", "must be >= 0");
    }
    if (cfg.train.key_momentum < 0.0 || cfg.train.key_momentum > 1.0) {
        constraint("train.key_momentum", "must lie in [0, 1]");
    }
    if (cfg.train.batch_size < 1) {
        constraint("train.batch_size", "must be >= 1");
    }
    if (cfg.train.epochs < 1) {
        constraint("train.epochs", "must be >= 1");
    }
    if (cfg.train.queue < 1) {
        constraint("train.queue", "must be >= 1");
    }
    if (cfg.train.grid_t < 1 || cfg.train.grid_h < 1 || cfg.train.grid_w < 1 ||
        cfg.train.hidden < 1 || cfg.train.embed < 1) {
        constraint("train.grid/hidden/embed", "must be positive");
    }
    if (cfg.corpus.count < 2) {
        constraint("corpus.count", "must be >= 2");
    }
    if (cfg.corpus.frames < 1 || cfg.corpus.height < 1 || cfg.corpus.width < 1) {
        constraint("corpus.frames/height/width", "must be positive");
    }
    if (cfg.corpus.kinds.empty()) {
        constraint("corpus.kinds", "must not be empty");
    }
    for (const auto& [name, weight] : cfg.corpus.kinds) {
        clip_kind_from_string(name);
        if (weight <= 0.0) {
            constraint("corpus.kinds." + name, "weight must be positive");
        }
    }
    if (cfg.motion.kind == "nonlinear" && cfg.motion.oversample <= cfg.corpus.frames) {
        constraint("motion.oversample", "must exceed corpus.frames for nonlinear motion");
    }
}

PairMode pair_mode_from_string(const std::string& name, const RunConfig& cfg) {
    PairMode mode;
    if (name == "tubelet") {
        mode.motion = motion_kind_from_string(cfg.motion.kind);
        mode.transform = transform_kind_from_string(cfg.transform.kind);
        return mode;
    }
    if (name == "scaled-crop-control") {
        mode.control = true;
        return mode;
    }
    std::string motion = name;
    std::string transform = "none";
    if (const auto plus = name.find('+'); plus != std::string::npos) {
        motion = name.substr(0, plus);
        transform = name.substr(plus + 1);
    }
    mode.motion = motion_kind_from_string(motion);
    mode.transform = transform_kind_from_string(transform);
    return mode;
}

PairConfig pair_config_from(const RunConfig& cfg, const PairMode& mode) {
    PairConfig pc;
    pc.tubelet_count = cfg.pair.tubelets;
    pc.motion = mode.motion;
    pc.transform = mode.control ? TransformKind::kNone : mode.transform;
    pc.motion_keyframes = cfg.motion.keyframes;
    pc.transform_keyframes = cfg.transform.keyframes;
    pc.oversample = cfg.motion.oversample;
    pc.sigma = cfg.motion.sigma;
    pc.reference_size = cfg.pair.reference_size;
    pc.patch_min = cfg.pair.patch_min;
    pc.patch_max = cfg.pair.patch_max;
    pc.delta_min = cfg.motion.delta_min;
    pc.delta_max = cfg.motion.delta_max;
    pc.scale_bounds = cfg.transform.scale;
    pc.rotation_bounds = cfg.transform.rotation;
    pc.shear_bounds = cfg.transform.shear;
    pc.augment.crop_scale = cfg.augment.crop_scale;
    pc.augment.flip_probability = cfg.augment.flip_probability;
    pc.augment.jitter = cfg.augment.jitter;
    pc.augment.out_height = cfg.augment.out_height;
    pc.augment.out_width = cfg.augment.out_width;
    return pc;
}

TrainConfig train_config_from(const RunConfig& cfg, std::uint64_t seed) {
    TrainConfig tc;
    tc.temperature = cfg.train.temperature;
    tc.learning_rate = cfg.train.learning_rate;
    tc.momentum = cfg.train.momentum;
    tc.weight_decay = cfg.train.weight_decay;
    tc.key_momentum = cfg.train.key_momentum;
    tc.batch_size = cfg.train.batch_size;
    tc.epochs = cfg.train.epochs;
    tc.queue_capacity = cfg.train.queue;
    tc.encoder.grid_t = cfg.train.grid_t;
    tc.encoder.grid_h = cfg.train.grid_h;
    tc.encoder.grid_w = cfg.train.grid_w;
    tc.encoder.hidden = cfg.train.hidden;
    tc.encoder.embed = cfg.train.embed;
    tc.seed = seed;
    return tc;
}

CorpusSpec corpus_spec_from(const RunConfig& cfg, std::uint64_t seed) {
    CorpusSpec spec;
    spec.count = cfg.corpus.count;
    spec.frames = cfg.corpus.frames;
    spec.height = cfg.corpus.height;
    spec.width = cfg.corpus.width;
    spec.kinds.clear();
    for (const auto& [name, weight] : cfg.corpus.kinds) {
        spec.kinds.emplace_back(clip_kind_from_string(name), weight);
    }
    spec.seed = seed;
    return spec;
}

}  // namespace tubelet
