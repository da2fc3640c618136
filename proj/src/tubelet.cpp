#include "tubelet/tubelet.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tubelet/error.hpp"
#include "tubelet/rng.hpp"

namespace tubelet {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDetEpsilon = 1e-6;
constexpr int kCoverageSamples = 4;  // 4×4 supersampling per pixel

struct Affine {
    // row-major 2×2
    double m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;

    double det() const { return m00 * m11 - m01 * m10; }
    Affine inverse() const {
        const double d = det();
        return Affine{m11 / d, -m01 / d, -m10 / d, m00 / d};
    }
    Vec2 apply(Vec2 v) const {
        return Vec2{m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
    }
};

Affine affine_for(TransformKind kind, TransformParams theta) {
    switch (kind) {
        case TransformKind::kNone:
            return Affine{};
        case TransformKind::kScale:
            return Affine{theta.a, 0.0, 0.0, theta.b};
        case TransformKind::kRotation: {
            const double rad = theta.a * kPi / 180.0;
            const double c = std::cos(rad);
            const double s = std::sin(rad);
            return Affine{c, -s, s, c};
        }
        case TransformKind::kShear:
            return Affine{1.0, theta.a, theta.b, 1.0};
    }
    throw InvalidConfigError("unknown transform kind");
}

bool is_identity(TransformKind kind, TransformParams theta) {
    const TransformParams id = identity_params(kind);
    return kind == TransformKind::kNone || (theta.a == id.a && theta.b == id.b);
}

template <typename Inside>
void fill_coverage(Patch& patch, Inside&& inside) {
    const double step = 1.0 / kCoverageSamples;
    for (int y = 0; y < patch.height; ++y) {
        for (int x = 0; x < patch.width; ++x) {
            int hits = 0;
            for (int sy = 0; sy < kCoverageSamples; ++sy) {
                for (int sx = 0; sx < kCoverageSamples; ++sx) {
                    const double px = x + (sx + 0.5) * step;
                    const double py = y + (sy + 0.5) * step;
                    if (inside(px, py)) {
                        ++hits;
                    }
                }
            }
            patch.mask[patch.mask_index(y, x)] =
                static_cast<float>(hits) / (kCoverageSamples * kCoverageSamples);
        }
    }
}

}  // namespace

ShapeKind shape_kind_from_string(const std::string& name) {
    if (name == "rectangle") return ShapeKind::kRectangle;
    if (name == "ellipse") return ShapeKind::kEllipse;
    if (name == "triangle") return ShapeKind::kTriangle;
    if (name == "rounded-rectangle") return ShapeKind::kRoundedRectangle;
    throw InvalidConfigError("unknown shape kind: " + name);
}

std::string to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::kRectangle: return "rectangle";
        case ShapeKind::kEllipse: return "ellipse";
        case ShapeKind::kTriangle: return "triangle";
        case ShapeKind::kRoundedRectangle: return "rounded-rectangle";
    }
    return "?";
}

TransformKind transform_kind_from_string(const std::string& name) {
    if (name == "none") return TransformKind::kNone;
    if (name == "scale") return TransformKind::kScale;
    if (name == "rotation") return TransformKind::kRotation;
    if (name == "shear") return TransformKind::kShear;
    throw InvalidConfigError("unknown transform kind: " + name);
}

std::string to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::kNone: return "none";
        case TransformKind::kScale: return "scale";
        case TransformKind::kRotation: return "rotation";
        case TransformKind::kShear: return "shear";
    }
    return "?";
}

TransformParams identity_params(TransformKind kind) {
    switch (kind) {
        case TransformKind::kScale: return TransformParams{1.0, 1.0};
        case TransformKind::kNone:
        case TransformKind::kRotation:
        case TransformKind::kShear: return TransformParams{0.0, 0.0};
    }
    throw InvalidConfigError("unknown transform kind");
}

Patch crop_patch(const Clip& clip, int size_min, int size_max, std::uint64_t seed) {
    if (size_min < 1 || size_min > size_max) {
        throw InvalidConfigError("crop_patch: require 1 <= size_min <= size_max");
    }
    if (size_max > std::min(clip.height, clip.width)) {
        throw InvalidConfigError("crop_patch: size_max exceeds frame dimensions");
    }
    Rng rng(seed);
    const int h = static_cast<int>(rng.uniform_int(size_min, size_max));
    const int w = static_cast<int>(rng.uniform_int(size_min, size_max));
    const int y0 = static_cast<int>(rng.uniform_int(0, clip.height - h));
    const int x0 = static_cast<int>(rng.uniform_int(0, clip.width - w));
    Patch patch(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                patch.pixels[patch.pixel_index(y, x, c)] = clip.at(0, y0 + y, x0 + x, c);
            }
            patch.mask[patch.mask_index(y, x)] = 1.0f;
        }
    }
    return patch;
}

Patch apply_shape(const Patch& patch, ShapeKind shape) {
    if (patch.height < 1 || patch.width < 1) {
        throw InvalidInputError("apply_shape: empty patch");
    }
    Patch out = patch;
    const double w = patch.width;
    const double h = patch.height;
    const double cx = w / 2.0;
    const double cy = h / 2.0;
    switch (shape) {
        case ShapeKind::kRectangle:
            std::fill(out.mask.begin(), out.mask.end(), 1.0f);
            break;
        case ShapeKind::kEllipse: {
            const double a = w / 2.0;
            const double b = h / 2.0;
            fill_coverage(out, [&](double px, double py) {
                const double dx = (px - cx) / a;
                const double dy = (py - cy) / b;
                return dx * dx + dy * dy <= 1.0;
            });
            break;
        }
        case ShapeKind::kTriangle: {
            // Isoceles, apex at top-center, base along the bottom edge.
            fill_coverage(out, [&](double px, double py) {
                if (py > h) {
                    return false;
                }
                const double half_width_at = (py / h) * (w / 2.0);
                return std::abs(px - cx) <= half_width_at;
            });
            break;
        }
        case ShapeKind::kRoundedRectangle: {
            const double r = 0.25 * std::min(w, h);
            fill_coverage(out, [&](double px, double py) {
                const double qx = std::max(std::abs(px - cx) - (w / 2.0 - r), 0.0);
                const double qy = std::max(std::abs(py - cy) - (h / 2.0 - r), 0.0);
                return qx * qx + qy * qy <= r * r;
            });
            break;
        }
    }
    return out;
}

TransformTrackDetail sample_transform_track_detailed(TransformKind kind, int frames,
                                                     int keyframes, Interval bounds,
                                                     std::uint64_t seed) {
    if (frames < 1) {
        throw InvalidConfigError("transform track: frames must be >= 1");
    }
    TransformTrackDetail detail;
    detail.track.kind = kind;
    if (kind == TransformKind::kNone) {
        detail.track.params.assign(frames, identity_params(kind));
        detail.keyframes.indices = {0, std::max(0, frames - 1)};
        detail.keyframe_params.assign(detail.keyframes.indices.size(),
                                      identity_params(kind));
        return detail;
    }
    if (bounds.lo > bounds.hi) {
        throw InvalidConfigError("transform track: invalid bounds");
    }
    detail.keyframes = sample_keyframes(frames, keyframes, derive_seed(seed, "keyframes"));
    Rng rng(derive_seed(seed, "params"));
    detail.keyframe_params.resize(detail.keyframes.indices.size());
    detail.keyframe_params[0] = identity_params(kind);
    for (std::size_t k = 1; k < detail.keyframe_params.size(); ++k) {
        TransformParams p;
        p.a = rng.uniform(bounds.lo, bounds.hi);
        p.b = (kind == TransformKind::kRotation) ? 0.0 : rng.uniform(bounds.lo, bounds.hi);
        detail.keyframe_params[k] = p;
    }
    std::vector<Vec2> key_values(detail.keyframe_params.size());
    for (std::size_t k = 0; k < key_values.size(); ++k) {
        key_values[k] = Vec2{detail.keyframe_params[k].a, detail.keyframe_params[k].b};
    }
    const std::vector<Vec2> interpolated =
        interpolate_keyframes(detail.keyframes, key_values, frames);
    detail.track.params.resize(frames);
    for (int i = 0; i < frames; ++i) {
        detail.track.params[i] = TransformParams{interpolated[i].x, interpolated[i].y};
    }
    return detail;
}

TransformTrack sample_transform_track(TransformKind kind, int frames, int keyframes,
                                      Interval bounds, std::uint64_t seed) {
    return sample_transform_track_detailed(kind, frames, keyframes, bounds, seed).track;
}

Patch warp(const Patch& patch, TransformKind kind, TransformParams theta) {
    if (patch.height < 1 || patch.width < 1) {
        throw InvalidInputError("warp: empty patch");
    }
    if (is_identity(kind, theta)) {
        return patch;
    }
    const Affine fwd = affine_for(kind, theta);
    if (std::abs(fwd.det()) < kDetEpsilon) {
        throw DegenerateTransformError("warp: affine matrix is singular");
    }
    const Affine inv = fwd.inverse();

    const double hw = patch.width / 2.0;
    const double hh = patch.height / 2.0;
    const std::array<Vec2, 4> corners = {Vec2{-hw, -hh}, Vec2{hw, -hh},
                                         Vec2{-hw, hh}, Vec2{hw, hh}};
    double max_x = 0.0, max_y = 0.0;
    for (const Vec2& c : corners) {
        const Vec2 t = fwd.apply(c);
        max_x = std::max(max_x, std::abs(t.x));
        max_y = std::max(max_y, std::abs(t.y));
    }
    // Corners come in ± pairs, so the bounding box is symmetric about 0.
    int out_w = std::max(1, static_cast<int>(std::ceil(2.0 * max_x - 1e-9)));
    int out_h = std::max(1, static_cast<int>(std::ceil(2.0 * max_y - 1e-9)));
    // Keep the canvas parity equal to the source so the centered content stays
    // on the source pixel lattice; compositions of warps then stay aligned.
    if ((out_w - patch.width) % 2 != 0) {
        ++out_w;
    }
    if ((out_h - patch.height) % 2 != 0) {
        ++out_h;
    }

    Patch out(out_h, out_w);
    const double out_cx = out_w / 2.0;
    const double out_cy = out_h / 2.0;
    const double src_cx = patch.width / 2.0;
    const double src_cy = patch.height / 2.0;

    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const Vec2 centered{x + 0.5 - out_cx, y + 0.5 - out_cy};
            const Vec2 src = inv.apply(centered);
            const double sx = src.x + src_cx - 0.5;
            const double sy = src.y + src_cy - 0.5;
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const double fx = sx - x0;
            const double fy = sy - y0;

            double mask_acc = 0.0;
            double pix_acc[3] = {0.0, 0.0, 0.0};
            double pix_weight = 0.0;
            for (int dy = 0; dy <= 1; ++dy) {
                for (int dx = 0; dx <= 1; ++dx) {
                    const int xs = x0 + dx;
                    const int ys = y0 + dy;
                    const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
                    if (w == 0.0 || xs < 0 || xs >= patch.width || ys < 0 ||
                        ys >= patch.height) {
                        continue;  // outside the source contributes mask 0
                    }
                    mask_acc += w * patch.mask[patch.mask_index(ys, xs)];
                    pix_weight += w;
                    for (int c = 0; c < 3; ++c) {
                        pix_acc[c] += w * patch.pixels[patch.pixel_index(ys, xs, c)];
                    }
                }
            }
            out.mask[out.mask_index(y, x)] = static_cast<float>(mask_acc);
            if (pix_weight > 0.0) {
                for (int c = 0; c < 3; ++c) {
                    out.pixels[out.pixel_index(y, x, c)] = static_cast<std::uint8_t>(
                        std::clamp(std::lround(pix_acc[c] / pix_weight), 0L, 255L));
                }
            }
        }
    }
    return out;
}

RenderedTubelet build_tubelet(const Patch& patch, const Trajectory& trajectory,
                              const TransformTrack& track) {
    if (trajectory.length() != track.length()) {
        throw InvalidInputError("build_tubelet: trajectory and track lengths differ");
    }
    RenderedTubelet rendered;
    rendered.frames.resize(trajectory.length());
    for (int i = 0; i < trajectory.length(); ++i) {
        try {
            // Frame 0 carries the identity parameters, so it holds the
            // untransformed patch.
            rendered.frames[i].warped = warp(patch, track.kind, track.params[i]);
        } catch (const DegenerateTransformError& e) {
            throw DegenerateTransformError(std::string(e.what()) + " at frame " +
                                           std::to_string(i));
        }
        rendered.frames[i].center = trajectory.centers[i];
    }
    return rendered;
}

}  // namespace tubelet
