#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tubelet/clip.hpp"
#include "tubelet/contrastive.hpp"
#include "tubelet/encoder.hpp"
#include "tubelet/synthcorpus.hpp"
#include "tubelet/trajectory.hpp"

namespace tubelet {

// Clip container ("TBC1"): 18-byte header — magic "TBC1", version u16 LE,
// then T, H, W as u32 LE — followed by T·H·W·3 payload bytes, frame-major,
// row-major, channel-interleaved. The channel count is fixed at 3.
inline constexpr std::uint16_t kClipFormatVersion = 1;

void write_clip(const Clip& clip, const std::filesystem::path& path);
Clip read_clip(const std::filesystem::path& path);

// Checkpoint ("TBCK"): magic, version u16 LE, then grid_t, grid_h, grid_w,
// hidden, embed as u32 LE, then every weight matrix and bias vector in
// declaration order as 64-bit little-endian reals (row-major matrices).
inline constexpr std::uint16_t kCheckpointFormatVersion = 1;

void write_checkpoint(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams read_checkpoint(const std::filesystem::path& path);

// Corpus manifest: one JSON record per line with id, path, kind, seed and
// shape [T, H, W]. Paths resolve relative to the manifest file; ids must be
// unique.
void write_corpus_manifest(const std::vector<CorpusEntry>& entries,
                           const std::filesystem::path& path);
std::vector<CorpusEntry> read_corpus_manifest(const std::filesystem::path& path);

// Loads every clip referenced by a manifest, in record order.
std::vector<Clip> load_corpus(const std::filesystem::path& manifest_path);

// Training history as comma-separated text: epoch, mean loss, learning rate.
void write_history_csv(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path);

// Binary portable pixmap (P6) writer for plots.
void write_ppm(const std::vector<std::uint8_t>& rgb, int width, int height,
               const std::filesystem::path& path);

// Each trajectory drawn as a polyline in a distinct color over a white
// canvas of the given frame size, with start/end markers.
void render_trajectory_plot(const std::vector<Trajectory>& trajectories, int width,
                            int height, const std::filesystem::path& path);

// Per-frame warped masks of a rendered tubelet laid out left to right as a
// grayscale strip.
void render_mask_strip(const RenderedTubelet& tubelet,
                       const std::filesystem::path& path);

// Fixed palette used by the plot renderer (exposed for tests).
std::vector<std::array<std::uint8_t, 3>> plot_palette();

}  // namespace tubelet
