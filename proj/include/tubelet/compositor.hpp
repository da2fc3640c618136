#pragma once

#include <cstdint>
#include <vector>

#include "tubelet/clip.hpp"
#include "tubelet/trajectory.hpp"
#include "tubelet/tubelet.hpp"

namespace tubelet {

struct AugmentConfig {
    Interval crop_scale{0.4, 1.0};   // area ratios
    int out_height = 32;
    int out_width = 32;
    double flip_probability = 0.5;
    Interval jitter{0.6, 1.4};       // per-channel multiplicative range
};

// One sampled realization of the augmentation: a single crop window, flip
// decision and jitter triple applied identically to all frames.
struct AugmentSample {
    int crop_y = 0, crop_x = 0, crop_h = 0, crop_w = 0;
    bool flip = false;
    double jitter[3] = {1.0, 1.0, 1.0};
};

AugmentSample sample_augment(const AugmentConfig& cfg, int src_height, int src_width,
                             std::uint64_t seed);
Clip apply_augment(const Clip& clip, const AugmentSample& sample, int out_height,
                   int out_width);
Clip spatial_augment(const Clip& clip, const AugmentConfig& cfg, std::uint64_t seed);

// Everything needed to build the M tubelets of a pair. Paper-scale values
// (patch size range, displacement bounds) are carried at reference_size and
// scaled by min(H, W) / reference_size for the actual clip.
struct PairConfig {
    int tubelet_count = 2;  // M
    MotionKind motion = MotionKind::kNonlinear;
    TransformKind transform = TransformKind::kRotation;
    int motion_keyframes = 3;
    int transform_keyframes = 3;
    int oversample = 48;
    double sigma = 8.0;
    double reference_size = 112.0;
    double patch_min = 16.0;   // at reference scale
    double patch_max = 64.0;   // at reference scale
    double delta_min = 40.0;   // at reference scale
    double delta_max = 80.0;   // at reference scale
    Interval scale_bounds{0.5, 1.5};
    Interval rotation_bounds{-90.0, 90.0};
    Interval shear_bounds{-1.0, 1.0};
    AugmentConfig augment;

    Interval transform_bounds() const;
    // Effective pixel values for a clip of the given size.
    int patch_min_px(int h, int w) const;
    int patch_max_px(int h, int w) const;
    double delta_min_px(int h, int w) const;
    double delta_max_px(int h, int w) const;
};

// Two composited clips sharing identical tubelets, plus generation metadata.
struct PairSample {
    Clip clip_a;  // v̂1
    Clip clip_b;  // v̂2
    std::vector<TubeletSpec> specs;
    CoverageMask union_mask_a;
    CoverageMask union_mask_b;
    std::uint64_t seed = 0;
};

// Alpha-composites the rendered tubelet onto the clip (per frame, at the
// rounded center position, clipped to the visible intersection) and
// accumulates coverage into the union mask.
Clip overlay(const Clip& clip, const RenderedTubelet& tubelet, CoverageMask& union_mask);

// Convenience overload returning a fresh mask.
std::pair<Clip, CoverageMask> overlay(const Clip& clip, const RenderedTubelet& tubelet);

struct PairDetail {
    PairSample sample;
    Clip augmented_a;  // spatially augmented v1, before any overlay
    Clip augmented_b;
    std::vector<RenderedTubelet> rendered;
};

// Augments v1 and v2 with independent sub-seeds, builds M tubelet specs from
// the augmented v1, and overlays the rendered tubelets identically onto both
// clips in index order.
PairSample make_pair(const Clip& v1, const Clip& v2, const PairConfig& cfg,
                     std::uint64_t seed);
PairDetail make_pair_detailed(const Clip& v1, const Clip& v2, const PairConfig& cfg,
                              std::uint64_t seed);

// Control condition: the same pipeline but every frame gets an independently
// re-sampled position, scale and jitter for each patch — no smooth trajectory,
// no interpolated transform track.
PairSample make_scaled_crop_control(const Clip& v1, const Clip& v2,
                                    const PairConfig& cfg, std::uint64_t seed);
PairDetail make_scaled_crop_control_detailed(const Clip& v1, const Clip& v2,
                                             const PairConfig& cfg, std::uint64_t seed);

// True iff clip_a and clip_b are integer-equal at every union-coverage-1
// position and each clip equals its augmented source wherever coverage is 0.
bool check_shared_tubelet_invariant(const PairDetail& detail,
                                    std::string* why = nullptr);

// Rebuilds the M tubelets of a pair from its seed, drawing patch pixels from
// the given stand-in clip. The original run cropped from augmented v1, so any
// clip with the same dimensions reproduces trajectories, tracks and shape
// masks exactly (pixel content may differ).
std::vector<RenderedTubelet> rebuild_pair_tubelets(const Clip& patch_source,
                                                   const PairConfig& cfg,
                                                   std::uint64_t pair_seed, bool control,
                                                   std::vector<TubeletSpec>* specs = nullptr);

}  // namespace tubelet
