#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubelet/clip.hpp"
#include "tubelet/trajectory.hpp"

namespace tubelet {

// A pseudo-object: an H′×W′ RGB pixel block plus a coverage mask in [0,1].
struct Patch {
    int height = 0;  // H′
    int width = 0;   // W′
    std::vector<std::uint8_t> pixels;  // height*width*3
    std::vector<float> mask;           // height*width

    Patch() = default;
    Patch(int h, int w)
        : height(h), width(w),
          pixels(static_cast<std::size_t>(h) * w * 3, 0),
          mask(static_cast<std::size_t>(h) * w, 0.0f) {}

    std::size_t pixel_index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * width + x) * 3 + c;
    }
    std::size_t mask_index(int y, int x) const {
        return static_cast<std::size_t>(y) * width + x;
    }
};

enum class ShapeKind { kRectangle, kEllipse, kTriangle, kRoundedRectangle };
constexpr int kShapeKindCount = 4;

ShapeKind shape_kind_from_string(const std::string& name);
std::string to_string(ShapeKind kind);

enum class TransformKind { kNone, kScale, kRotation, kShear };

TransformKind transform_kind_from_string(const std::string& name);
std::string to_string(TransformKind kind);

// Per-frame transformation parameters θ. Interpretation depends on the kind:
// scale (a=w ratio, b=h ratio), rotation (a=angle in degrees, b unused),
// shear (a=r, b=s), none (unused).
struct TransformParams {
    double a = 0.0;
    double b = 0.0;
};

TransformParams identity_params(TransformKind kind);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Length-T sequence of transformation parameters. params[0] is always the
// identity; keyframe parameters are sampled, the rest interpolated.
struct TransformTrack {
    TransformKind kind = TransformKind::kNone;
    std::vector<TransformParams> params;
    int length() const { return static_cast<int>(params.size()); }
};

struct TransformTrackDetail {
    TransformTrack track;
    KeyframeSet keyframes;
    std::vector<TransformParams> keyframe_params;
};

struct TubeletSpec {
    Patch patch;
    Trajectory trajectory;
    TransformTrack track;
};

struct RenderedFrame {
    Patch warped;
    Vec2 center;
};

// Per-frame realization of a tubelet, ready for compositing.
struct RenderedTubelet {
    std::vector<RenderedFrame> frames;
    int length() const { return static_cast<int>(frames.size()); }
};

// H′ and W′ drawn independently and uniformly from [size_min, size_max];
// top-left drawn uniformly so the crop fits inside frame 0 of the clip.
// Mask initialized to all ones.
Patch crop_patch(const Clip& clip, int size_min, int size_max, std::uint64_t seed);

// Replaces the mask with the supersampled analytic coverage of the shape
// inscribed in the patch rectangle; pixels unchanged.
Patch apply_shape(const Patch& patch, ShapeKind shape);

// Keyframes via sample_keyframes; θ at the first keyframe is the identity,
// other keyframes drawn uniformly from [bounds.lo, bounds.hi] per component,
// remaining frames interpolated componentwise.
TransformTrack sample_transform_track(TransformKind kind, int frames, int keyframes,
                                      Interval bounds, std::uint64_t seed);
TransformTrackDetail sample_transform_track_detailed(TransformKind kind, int frames,
                                                     int keyframes, Interval bounds,
                                                     std::uint64_t seed);

// Applies the affine map for (kind, θ) about the patch center. The output
// canvas is the axis-aligned bounding box of the transformed corners;
// inverse-mapped with bilinear sampling, samples outside the source get
// mask 0.
Patch warp(const Patch& patch, TransformKind kind, TransformParams theta);

// Frame i holds warp(patch, kind, θ^i) positioned at trajectory center i.
RenderedTubelet build_tubelet(const Patch& patch, const Trajectory& trajectory,
                              const TransformTrack& track);

}  // namespace tubelet
