#include "tubelet/compositor.hpp"

#include <algorithm>
#include <cmath>

#include "tubelet/error.hpp"
#include "tubelet/rng.hpp"

namespace tubelet {

namespace {

double scale_factor(const PairConfig& cfg, int h, int w) {
    return static_cast<double>(std::min(h, w)) / cfg.reference_size;
}

MotionConfig motion_config_for(const PairConfig& cfg, int frames, int h, int w) {
    MotionConfig mcfg;
    mcfg.kind = cfg.motion;
    mcfg.frames = frames;
    mcfg.height = h;
    mcfg.width = w;
    mcfg.keyframes = cfg.motion_keyframes;
    mcfg.delta_min = cfg.delta_min_px(h, w);
    mcfg.delta_max = cfg.delta_max_px(h, w);
    mcfg.oversample = cfg.oversample;
    mcfg.sigma = cfg.sigma;
    return mcfg;
}

std::uint8_t jitter_pixel(std::uint8_t v, double factor) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v * factor), 0L, 255L));
}

Patch jitter_patch(const Patch& patch, const double jitter[3]) {
    Patch out = patch;
    for (int y = 0; y < patch.height; ++y) {
        for (int x = 0; x < patch.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                const std::size_t i = patch.pixel_index(y, x, c);
                out.pixels[i] = jitter_pixel(patch.pixels[i], jitter[c]);
            }
        }
    }
    return out;
}

}  // namespace

Interval PairConfig::transform_bounds() const {
    switch (transform) {
        case TransformKind::kScale: return scale_bounds;
        case TransformKind::kRotation: return rotation_bounds;
        case TransformKind::kShear: return shear_bounds;
        case TransformKind::kNone: return Interval{0.0, 0.0};
    }
    throw InvalidConfigError("unknown transform kind");
}

int PairConfig::patch_min_px(int h, int w) const {
    return std::max(1, static_cast<int>(std::lround(patch_min * scale_factor(*this, h, w))));
}

int PairConfig::patch_max_px(int h, int w) const {
    return std::max(patch_min_px(h, w),
                    static_cast<int>(std::lround(patch_max * scale_factor(*this, h, w))));
}

double PairConfig::delta_min_px(int h, int w) const {
    return delta_min * scale_factor(*this, h, w);
}

double PairConfig::delta_max_px(int h, int w) const {
    return delta_max * scale_factor(*this, h, w);
}

AugmentSample sample_augment(const AugmentConfig& cfg, int src_height, int src_width,
                             std::uint64_t seed) {
    if (cfg.crop_scale.lo <= 0.0 || cfg.crop_scale.lo > cfg.crop_scale.hi ||
        cfg.crop_scale.hi > 1.0) {
        throw InvalidConfigError("augment: crop scale range must satisfy 0 < lo <= hi <= 1");
    }
    if (cfg.flip_probability < 0.0 || cfg.flip_probability > 1.0) {
        throw InvalidConfigError("augment: flip probability must lie in [0, 1]");
    }
    if (cfg.jitter.lo <= 0.0 || cfg.jitter.lo > cfg.jitter.hi) {
        throw InvalidConfigError("augment: jitter range must satisfy 0 < lo <= hi");
    }
    if (cfg.out_height < 1 || cfg.out_width < 1) {
        throw InvalidConfigError("augment: output size must be positive");
    }
    // The crop is resized down (never up) to the output, so the largest
    // admissible crop must cover the output size.
    const double max_side = std::sqrt(cfg.crop_scale.hi);
    if (static_cast<int>(std::lround(src_height * max_side)) < cfg.out_height ||
        static_cast<int>(std::lround(src_width * max_side)) < cfg.out_width) {
        throw InvalidConfigError(
            "augment: output exceeds source under the maximum crop scale");
    }
    Rng rng(seed);
    const double side = std::sqrt(rng.uniform(cfg.crop_scale.lo, cfg.crop_scale.hi));
    AugmentSample s;
    s.crop_h = std::clamp(static_cast<int>(std::lround(src_height * side)),
                          cfg.out_height, src_height);
    s.crop_w = std::clamp(static_cast<int>(std::lround(src_width * side)),
                          cfg.out_width, src_width);
    s.crop_y = static_cast<int>(rng.uniform_int(0, src_height - s.crop_h));
    s.crop_x = static_cast<int>(rng.uniform_int(0, src_width - s.crop_w));
    s.flip = rng.bernoulli(cfg.flip_probability);
    for (int c = 0; c < 3; ++c) {
        s.jitter[c] = rng.uniform(cfg.jitter.lo, cfg.jitter.hi);
    }
    return s;
}

Clip apply_augment(const Clip& clip, const AugmentSample& s, int out_height,
                   int out_width) {
    Clip out(clip.frames, out_height, out_width);
    out.frame_rate = clip.frame_rate;
    const double sy_scale = static_cast<double>(s.crop_h) / out_height;
    const double sx_scale = static_cast<double>(s.crop_w) / out_width;
    for (int t = 0; t < clip.frames; ++t) {
        for (int y = 0; y < out_height; ++y) {
            const double sy = (y + 0.5) * sy_scale - 0.5;
            const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, s.crop_h - 1);
            const int y1 = std::min(y0 + 1, s.crop_h - 1);
            const double fy = std::clamp(sy - y0, 0.0, 1.0);
            for (int x = 0; x < out_width; ++x) {
                const int ox = s.flip ? out_width - 1 - x : x;
                const double sx = (x + 0.5) * sx_scale - 0.5;
                const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, s.crop_w - 1);
                const int x1 = std::min(x0 + 1, s.crop_w - 1);
                const double fx = std::clamp(sx - x0, 0.0, 1.0);
                for (int c = 0; c < 3; ++c) {
                    const double v00 = clip.at(t, s.crop_y + y0, s.crop_x + x0, c);
                    const double v10 = clip.at(t, s.crop_y + y0, s.crop_x + x1, c);
                    const double v01 = clip.at(t, s.crop_y + y1, s.crop_x + x0, c);
                    const double v11 = clip.at(t, s.crop_y + y1, s.crop_x + x1, c);
                    const double v0 = v00 + (v10 - v00) * fx;
                    const double v1 = v01 + (v11 - v01) * fx;
                    const double v = (v0 + (v1 - v0) * fy) * s.jitter[c];
                    out.at(t, y, ox, c) = static_cast<std::uint8_t>(
                        std::clamp(std::lround(v), 0L, 255L));
                }
            }
        }
    }
    return out;
}

Clip spatial_augment(const Clip& clip, const AugmentConfig& cfg, std::uint64_t seed) {
    const AugmentSample s = sample_augment(cfg, clip.height, clip.width, seed);
    return apply_augment(clip, s, cfg.out_height, cfg.out_width);
}

Clip overlay(const Clip& clip, const RenderedTubelet& tubelet, CoverageMask& union_mask) {
    if (tubelet.length() != clip.frames) {
        throw InvalidInputError("overlay: clip and tubelet lengths differ");
    }
    if (union_mask.frames != clip.frames || union_mask.height != clip.height ||
        union_mask.width != clip.width) {
        throw InvalidInputError("overlay: union mask shape mismatch");
    }
    Clip out = clip;
    for (int t = 0; t < clip.frames; ++t) {
        const Patch& p = tubelet.frames[t].warped;
        const Vec2 center = tubelet.frames[t].center;
        const int x0 = static_cast<int>(std::lround(center.x - p.width / 2.0));
        const int y0 = static_cast<int>(std::lround(center.y - p.height / 2.0));
        const int ylo = std::max(0, y0);
        const int yhi = std::min(clip.height, y0 + p.height);
        const int xlo = std::max(0, x0);
        const int xhi = std::min(clip.width, x0 + p.width);
        for (int y = ylo; y < yhi; ++y) {
            for (int x = xlo; x < xhi; ++x) {
                const float m = p.mask[p.mask_index(y - y0, x - x0)];
                if (m <= 0.0f) {
                    continue;
                }
                const double md = m;
                for (int c = 0; c < 3; ++c) {
                    const double fg = p.pixels[p.pixel_index(y - y0, x - x0, c)];
                    const double bg = out.at(t, y, x, c);
                    out.at(t, y, x, c) = static_cast<std::uint8_t>(
                        std::clamp(std::lround(md * fg + (1.0 - md) * bg), 0L, 255L));
                }
                float& u = union_mask.at(t, y, x);
                u = std::max({1.0f - (1.0f - u) * (1.0f - m), u, m});
            }
        }
    }
    return out;
}

std::pair<Clip, CoverageMask> overlay(const Clip& clip, const RenderedTubelet& tubelet) {
    CoverageMask mask(clip.frames, clip.height, clip.width);
    Clip out = overlay(clip, tubelet, mask);
    return {std::move(out), std::move(mask)};
}

namespace {

struct TubeletBuild {
    TubeletSpec spec;
    RenderedTubelet rendered;
};

TubeletBuild build_pair_tubelet(const Clip& source, const PairConfig& cfg,
                                std::uint64_t base_seed) {
    TubeletBuild b;
    const int pmin = cfg.patch_min_px(source.height, source.width);
    const int pmax = cfg.patch_max_px(source.height, source.width);
    Patch patch = crop_patch(source, pmin, pmax, derive_seed(base_seed, "patch"));
    Rng shape_rng(derive_seed(base_seed, "shape"));
    const ShapeKind shape =
        static_cast<ShapeKind>(shape_rng.uniform_int(0, kShapeKindCount - 1));
    patch = apply_shape(patch, shape);

    const MotionConfig mcfg =
        motion_config_for(cfg, source.frames, source.height, source.width);
    b.spec.patch = patch;
    b.spec.trajectory = make_trajectory(mcfg, derive_seed(base_seed, "trajectory"));
    b.spec.track = sample_transform_track(cfg.transform, source.frames,
                                          cfg.transform_keyframes, cfg.transform_bounds(),
                                          derive_seed(base_seed, "track"));
    b.rendered = build_tubelet(b.spec.patch, b.spec.trajectory, b.spec.track);
    return b;
}

TubeletBuild build_control_tubelet(const Clip& source, const PairConfig& cfg,
                                   std::uint64_t base_seed) {
    TubeletBuild b;
    const int pmin = cfg.patch_min_px(source.height, source.width);
    const int pmax = cfg.patch_max_px(source.height, source.width);
    Patch patch = crop_patch(source, pmin, pmax, derive_seed(base_seed, "patch"));
    Rng shape_rng(derive_seed(base_seed, "shape"));
    const ShapeKind shape =
        static_cast<ShapeKind>(shape_rng.uniform_int(0, kShapeKindCount - 1));
    patch = apply_shape(patch, shape);

    Rng ctrl(derive_seed(base_seed, "control"));
    b.spec.patch = patch;
    b.spec.track.kind = TransformKind::kScale;
    b.rendered.frames.resize(source.frames);
    for (int t = 0; t < source.frames; ++t) {
        Vec2 pos{ctrl.uniform(0.0, source.width), ctrl.uniform(0.0, source.height)};
        TransformParams scale{ctrl.uniform(cfg.scale_bounds.lo, cfg.scale_bounds.hi),
                              ctrl.uniform(cfg.scale_bounds.lo, cfg.scale_bounds.hi)};
        double jit[3];
        for (int c = 0; c < 3; ++c) {
            jit[c] = ctrl.uniform(cfg.augment.jitter.lo, cfg.augment.jitter.hi);
        }
        b.spec.trajectory.centers.push_back(pos);
        b.spec.track.params.push_back(scale);
        b.rendered.frames[t].warped =
            warp(jitter_patch(patch, jit), TransformKind::kScale, scale);
        b.rendered.frames[t].center = pos;
    }
    return b;
}

PairDetail make_pair_impl(const Clip& v1, const Clip& v2, const PairConfig& cfg,
                          std::uint64_t seed, bool control) {
    if (!v1.same_shape(v2)) {
        throw InvalidInputError("make_pair: clip dimensions differ");
    }
    if (cfg.tubelet_count < 0) {
        throw InvalidConfigError("make_pair: tubelet count must be >= 0");
    }
    PairDetail detail;
    detail.augmented_a = spatial_augment(v1, cfg.augment, derive_seed(seed, "augment", 0));
    detail.augmented_b = spatial_augment(v2, cfg.augment, derive_seed(seed, "augment", 1));

    detail.sample.seed = seed;
    detail.sample.clip_a = detail.augmented_a;
    detail.sample.clip_b = detail.augmented_b;
    detail.sample.union_mask_a = CoverageMask(detail.augmented_a.frames,
                                              detail.augmented_a.height,
                                              detail.augmented_a.width);
    detail.sample.union_mask_b = detail.sample.union_mask_a;

    for (int j = 0; j < cfg.tubelet_count; ++j) {
        const std::uint64_t base = derive_seed(seed, "tubelet", static_cast<std::uint64_t>(j));
        TubeletBuild b = control ? build_control_tubelet(detail.augmented_a, cfg, base)
                                 : build_pair_tubelet(detail.augmented_a, cfg, base);
        detail.sample.clip_a = overlay(detail.sample.clip_a, b.rendered,
                                       detail.sample.union_mask_a);
        detail.sample.clip_b = overlay(detail.sample.clip_b, b.rendered,
                                       detail.sample.union_mask_b);
        detail.sample.specs.push_back(std::move(b.spec));
        detail.rendered.push_back(std::move(b.rendered));
    }
    return detail;
}

}  // namespace

PairDetail make_pair_detailed(const Clip& v1, const Clip& v2, const PairConfig& cfg,
                              std::uint64_t seed) {
    return make_pair_impl(v1, v2, cfg, seed, false);
}

PairSample make_pair(const Clip& v1, const Clip& v2, const PairConfig& cfg,
                     std::uint64_t seed) {
    return make_pair_impl(v1, v2, cfg, seed, false).sample;
}

PairDetail make_scaled_crop_control_detailed(const Clip& v1, const Clip& v2,
                                             const PairConfig& cfg, std::uint64_t seed) {
    return make_pair_impl(v1, v2, cfg, seed, true);
}

PairSample make_scaled_crop_control(const Clip& v1, const Clip& v2,
                                    const PairConfig& cfg, std::uint64_t seed) {
    return make_pair_impl(v1, v2, cfg, seed, true).sample;
}

std::vector<RenderedTubelet> rebuild_pair_tubelets(const Clip& patch_source,
                                                   const PairConfig& cfg,
                                                   std::uint64_t pair_seed, bool control,
                                                   std::vector<TubeletSpec>* specs) {
    std::vector<RenderedTubelet> rendered;
    for (int j = 0; j < cfg.tubelet_count; ++j) {
        const std::uint64_t base =
            derive_seed(pair_seed, "tubelet", static_cast<std::uint64_t>(j));
        TubeletBuild b = control ? build_control_tubelet(patch_source, cfg, base)
                                 : build_pair_tubelet(patch_source, cfg, base);
        if (specs != nullptr) {
            specs->push_back(std::move(b.spec));
        }
        rendered.push_back(std::move(b.rendered));
    }
    return rendered;
}

bool check_shared_tubelet_invariant(const PairDetail& detail, std::string* why) {
    const PairSample& s = detail.sample;
    auto fail = [&](const std::string& msg) {
        if (why != nullptr) {
            *why = msg;
        }
        return false;
    };
    if (!s.clip_a.same_shape(s.clip_b) || !s.clip_a.same_shape(detail.augmented_a)) {
        return fail("clip shapes differ");
    }
    for (int t = 0; t < s.clip_a.frames; ++t) {
        for (int y = 0; y < s.clip_a.height; ++y) {
            for (int x = 0; x < s.clip_a.width; ++x) {
                const float ua = s.union_mask_a.at(t, y, x);
                const float ub = s.union_mask_b.at(t, y, x);
                if (ua != ub) {
                    return fail("union masks differ at frame " + std::to_string(t));
                }
                for (int c = 0; c < 3; ++c) {
                    if (ua == 1.0f &&
                        s.clip_a.at(t, y, x, c) != s.clip_b.at(t, y, x, c)) {
                        return fail("pair members differ inside full coverage at frame " +
                                    std::to_string(t));
                    }
                    if (ua == 0.0f &&
                        (s.clip_a.at(t, y, x, c) != detail.augmented_a.at(t, y, x, c) ||
                         s.clip_b.at(t, y, x, c) != detail.augmented_b.at(t, y, x, c))) {
                        return fail("background modified outside coverage at frame " +
                                    std::to_string(t));
                    }
                }
            }
        }
    }
    return true;
}

}  // namespace tubelet
