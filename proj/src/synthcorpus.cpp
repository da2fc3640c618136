#include "tubelet/synthcorpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "tubelet/error.hpp"
#include "tubelet/rng.hpp"
#include "tubelet/storage.hpp"

namespace tubelet {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

Clip gen_uniform_noise(int frames, int height, int width, Rng& rng) {
    Clip clip(frames, height, width);
    for (std::uint8_t& p : clip.pixels) {
        p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    }
    return clip;
}

Clip gen_static_texture(int frames, int height, int width, Rng& rng) {
    Clip clip(frames, height, width);
    const std::size_t frame_size = static_cast<std::size_t>(height) * width * 3;
    for (std::size_t i = 0; i < frame_size; ++i) {
        clip.pixels[i] = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    }
    for (int t = 1; t < frames; ++t) {
        std::copy(clip.pixels.begin(), clip.pixels.begin() + frame_size,
                  clip.pixels.begin() + t * frame_size);
    }
    return clip;
}

// A sinusoidal base frame rolled by an integer velocity each frame, so frame
// t+1 is exactly frame t translated (cyclically).
Clip gen_moving_gradient(int frames, int height, int width, Rng& rng) {
    const double angle = rng.uniform(0.0, kTwoPi);
    const double cycles = rng.uniform(1.0, 3.0);
    const double phase = rng.uniform(0.0, kTwoPi);
    int vx = static_cast<int>(rng.uniform_int(-3, 3));
    int vy = static_cast<int>(rng.uniform_int(-3, 3));
    if (vx == 0 && vy == 0) {
        vx = 1;
    }
    const double fx = std::cos(angle) * cycles / width;
    const double fy = std::sin(angle) * cycles / height;

    std::vector<std::uint8_t> base(static_cast<std::size_t>(height) * width * 3);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double v = 127.5 + 127.0 * std::sin(kTwoPi * (fx * x + fy * y) + phase);
            const auto b = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            for (int c = 0; c < 3; ++c) {
                base[(static_cast<std::size_t>(y) * width + x) * 3 + c] = b;
            }
        }
    }
    Clip clip(frames, height, width);
    for (int t = 0; t < frames; ++t) {
        const int dx = ((t * vx) % width + width) % width;
        const int dy = ((t * vy) % height + height) % height;
        for (int y = 0; y < height; ++y) {
            const int sy = (y - dy + height * frames) % height;
            for (int x = 0; x < width; ++x) {
                const int sx = (x - dx + width * frames) % width;
                for (int c = 0; c < 3; ++c) {
                    clip.at(t, y, x, c) = base[(static_cast<std::size_t>(sy) * width + sx) * 3 + c];
                }
            }
        }
    }
    return clip;
}

Clip gen_drifting_blobs(int frames, int height, int width, Rng& rng) {
    struct Blob {
        double x, y, vx, vy, radius;
        double color[3];
    };
    const int blob_count = static_cast<int>(rng.uniform_int(3, 6));
    std::vector<Blob> blobs(blob_count);
    for (Blob& b : blobs) {
        b.x = rng.uniform(0.0, width);
        b.y = rng.uniform(0.0, height);
        b.vx = rng.uniform(-2.0, 2.0);
        b.vy = rng.uniform(-2.0, 2.0);
        b.radius = rng.uniform(0.08, 0.25) * std::min(width, height);
        for (double& c : b.color) {
            c = rng.uniform(64.0, 255.0);
        }
    }
    Clip clip(frames, height, width);
    for (int t = 0; t < frames; ++t) {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                double acc[3] = {24.0, 24.0, 24.0};  // dim backdrop
                for (const Blob& b : blobs) {
                    const double bx = b.x + t * b.vx;
                    const double by = b.y + t * b.vy;
                    const double d2 = (x - bx) * (x - bx) + (y - by) * (y - by);
                    const double w = std::exp(-d2 / (2.0 * b.radius * b.radius));
                    for (int c = 0; c < 3; ++c) {
                        acc[c] += w * b.color[c];
                    }
                }
                for (int c = 0; c < 3; ++c) {
                    clip.at(t, y, x, c) = static_cast<std::uint8_t>(
                        std::clamp(std::lround(acc[c]), 0L, 255L));
                }
            }
        }
    }
    return clip;
}

}  // namespace

ClipKind clip_kind_from_string(const std::string& name) {
    if (name == "uniform-noise") return ClipKind::kUniformNoise;
    if (name == "moving-gradient") return ClipKind::kMovingGradient;
    if (name == "drifting-blobs") return ClipKind::kDriftingBlobs;
    if (name == "static-texture") return ClipKind::kStaticTexture;
    throw InvalidConfigError("unknown clip kind: " + name);
}

std::string to_string(ClipKind kind) {
    switch (kind) {
        case ClipKind::kUniformNoise: return "uniform-noise";
        case ClipKind::kMovingGradient: return "moving-gradient";
        case ClipKind::kDriftingBlobs: return "drifting-blobs";
        case ClipKind::kStaticTexture: return "static-texture";
    }
    return "?";
}

Clip gen_clip(ClipKind kind, int frames, int height, int width, std::uint64_t seed) {
    if (frames < 1 || height < 1 || width < 1) {
        throw InvalidConfigError("gen_clip: invalid shape");
    }
    Rng rng(seed);
    switch (kind) {
        case ClipKind::kUniformNoise: return gen_uniform_noise(frames, height, width, rng);
        case ClipKind::kMovingGradient:
            return gen_moving_gradient(frames, height, width, rng);
        case ClipKind::kDriftingBlobs:
            return gen_drifting_blobs(frames, height, width, rng);
        case ClipKind::kStaticTexture:
            return gen_static_texture(frames, height, width, rng);
    }
    throw InvalidConfigError("gen_clip: unknown kind");
}

ClipKind pick_kind(const CorpusSpec& spec, int index) {
    if (spec.kinds.empty()) {
        throw InvalidConfigError("corpus spec: no clip kinds");
    }
    double total = 0.0;
    for (const auto& [kind, weight] : spec.kinds) {
        if (weight <= 0.0) {
            throw InvalidConfigError("corpus spec: kind weights must be positive");
        }
        total += weight;
    }
    Rng rng(derive_seed(spec.seed, "kind", static_cast<std::uint64_t>(index)));
    double r = rng.uniform(0.0, total);
    for (const auto& [kind, weight] : spec.kinds) {
        if (r < weight) {
            return kind;
        }
        r -= weight;
    }
    return spec.kinds.back().first;
}

namespace {

void validate_spec(const CorpusSpec& spec) {
    if (spec.count < 2) {
        throw InvalidConfigError("corpus spec: count must be >= 2");
    }
    if (spec.frames < 1 || spec.height < 1 || spec.width < 1) {
        throw InvalidConfigError("corpus spec: invalid clip shape");
    }
}

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

std::vector<CorpusEntry> build_corpus(const CorpusSpec& spec,
                                      const std::filesystem::path& out_dir,
                                      int jobs) {
    validate_spec(spec);
    std::filesystem::create_directories(out_dir);
    std::vector<CorpusEntry> entries(spec.count);
    parallel_for(spec.count, jobs, [&](int i) {
        CorpusEntry& e = entries[i];
        char id[24];
        std::snprintf(id, sizeof(id), "clip_%06d", i);
        e.id = id;
        e.path = e.id + ".tbc";
        e.kind = pick_kind(spec, i);
        e.seed = derive_seed(spec.seed, "clip", static_cast<std::uint64_t>(i));
        e.frames = spec.frames;
        e.height = spec.height;
        e.width = spec.width;
        const Clip clip = gen_clip(e.kind, spec.frames, spec.height, spec.width, e.seed);
        write_clip(clip, out_dir / e.path);
    });
    write_corpus_manifest(entries, out_dir / "manifest.jsonl");
    return entries;
}

std::vector<Clip> generate_corpus_clips(const CorpusSpec& spec) {
    validate_spec(spec);
    std::vector<Clip> clips(spec.count);
    for (int i = 0; i < spec.count; ++i) {
        clips[i] = gen_clip(pick_kind(spec, i), spec.frames, spec.height, spec.width,
                            derive_seed(spec.seed, "clip", static_cast<std::uint64_t>(i)));
    }
    return clips;
}

}  // namespace tubelet
