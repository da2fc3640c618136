#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tubelet/clip.hpp"

namespace tubelet {

enum class ClipKind { kUniformNoise, kMovingGradient, kDriftingBlobs, kStaticTexture };

ClipKind clip_kind_from_string(const std::string& name);
std::string to_string(ClipKind kind);

struct CorpusSpec {
    int count = 256;
    int frames = 16;
    int height = 32;
    int width = 32;
    // Weighted set of generator kinds.
    std::vector<std::pair<ClipKind, double>> kinds = {
        {ClipKind::kUniformNoise, 1.0},
        {ClipKind::kMovingGradient, 1.0},
        {ClipKind::kDriftingBlobs, 1.0},
        {ClipKind::kStaticTexture, 1.0},
    };
    std::uint64_t seed = 0;
};

// Deterministic procedural background clip.
Clip gen_clip(ClipKind kind, int frames, int height, int width, std::uint64_t seed);

struct CorpusEntry {
    std::string id;
    std::string path;  // relative to the manifest
    ClipKind kind = ClipKind::kUniformNoise;
    std::uint64_t seed = 0;
    int frames = 0, height = 0, width = 0;
};

// Writes spec.count clips in the container format plus a manifest; re-running
// with the same spec overwrites with identical bytes. Returns the entries in
// index order.
std::vector<CorpusEntry> build_corpus(const CorpusSpec& spec,
                                      const std::filesystem::path& out_dir,
                                      int jobs = 1);

// In-memory variant used by training pipelines.
std::vector<Clip> generate_corpus_clips(const CorpusSpec& spec);

// Kind for corpus index i under the spec's weights, deterministic in the
// spec seed.
ClipKind pick_kind(const CorpusSpec& spec, int index);

}  // namespace tubelet
