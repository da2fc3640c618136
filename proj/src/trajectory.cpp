#include "tubelet/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tubelet/error.hpp"
#include "tubelet/rng.hpp"

namespace tubelet {

namespace {

constexpr int kKeyframeRetryCap = 1000;

void validate_common(const MotionConfig& cfg) {
    if (cfg.frames < 1) {
        throw InvalidConfigError("motion config: frames must be >= 1");
    }
    if (cfg.width <= 0 || cfg.height <= 0) {
        throw InvalidConfigError("motion config: frame dimensions must be positive");
    }
}

// Reflect an arbitrary integer index into [0, n) with half-sample symmetry
// (…, 1, 0 | 0, 1, …, n−1 | n−1, n−2, …), period 2n.
int reflect_index(long i, int n) {
    if (n == 1) {
        return 0;
    }
    const long period = 2L * n;
    long m = i % period;
    if (m < 0) {
        m += period;
    }
    return static_cast<int>(m < n ? m : period - 1 - m);
}

}  // namespace

MotionKind motion_kind_from_string(const std::string& name) {
    if (name == "static") return MotionKind::kStatic;
    if (name == "linear") return MotionKind::kLinear;
    if (name == "nonlinear") return MotionKind::kNonlinear;
    throw InvalidConfigError("unknown motion kind: " + name);
}

std::string to_string(MotionKind kind) {
    switch (kind) {
        case MotionKind::kStatic: return "static";
        case MotionKind::kLinear: return "linear";
        case MotionKind::kNonlinear: return "nonlinear";
    }
    return "?";
}

KeyframeSet sample_keyframes(int frames, int keyframes, std::uint64_t seed) {
    if (keyframes < 2) {
        throw InvalidConfigError("keyframe count must be >= 2");
    }
    if (keyframes > frames) {
        throw InvalidConfigError("keyframe count exceeds frame count");
    }
    Rng rng(seed);
    // Floyd's algorithm: uniform (K−2)-subset of the interior [1, T−2].
    std::set<int> interior;
    const int lo = 1;
    const int hi = frames - 2;
    const int want = keyframes - 2;
    for (int j = hi - want + 1; j <= hi; ++j) {
        const int t = static_cast<int>(rng.uniform_int(lo, j));
        if (!interior.insert(t).second) {
            interior.insert(j);
        }
    }
    KeyframeSet keys;
    keys.indices.reserve(keyframes);
    keys.indices.push_back(0);
    keys.indices.insert(keys.indices.end(), interior.begin(), interior.end());
    keys.indices.push_back(frames - 1);
    return keys;
}

std::vector<Vec2> interpolate_keyframes(const KeyframeSet& keys,
                                        const std::vector<Vec2>& key_values,
                                        int frames) {
    if (keys.indices.size() != key_values.size() || keys.indices.empty()) {
        throw InvalidInputError("keyframe indices and values must match and be non-empty");
    }
    std::vector<Vec2> out(frames);
    for (std::size_t k = 0; k + 1 < keys.indices.size(); ++k) {
        const int a = keys.indices[k];
        const int b = keys.indices[k + 1];
        for (int i = a; i <= b; ++i) {
            if (i == a) {
                out[i] = key_values[k];
            } else if (i == b) {
                out[i] = key_values[k + 1];
            } else {
                const double t = static_cast<double>(i - a) / static_cast<double>(b - a);
                out[i].x = (1.0 - t) * key_values[k].x + t * key_values[k + 1].x;
                out[i].y = (1.0 - t) * key_values[k].y + t * key_values[k + 1].y;
            }
        }
    }
    if (frames == 1) {
        out[0] = key_values[0];
    }
    return out;
}

Trajectory static_trajectory(const MotionConfig& cfg, std::uint64_t seed) {
    validate_common(cfg);
    Rng rng(seed);
    Vec2 center;
    center.x = rng.uniform(0.0, cfg.width);
    center.y = rng.uniform(0.0, cfg.height);
    Trajectory traj;
    traj.centers.assign(cfg.frames, center);
    return traj;
}

LinearTrajectoryDetail linear_trajectory_detailed(const MotionConfig& cfg,
                                                  std::uint64_t seed) {
    validate_common(cfg);
    if (cfg.delta_min <= 0.0 || cfg.delta_min > cfg.delta_max) {
        throw InvalidConfigError("motion config: require 0 < delta_min <= delta_max");
    }
    LinearTrajectoryDetail detail;
    detail.keyframes = sample_keyframes(cfg.frames, cfg.keyframes,
                                        derive_seed(seed, "keyframes"));
    Rng rng(derive_seed(seed, "centers"));
    auto& centers = detail.keyframe_centers;
    centers.push_back({rng.uniform(0.0, cfg.width), rng.uniform(0.0, cfg.height)});
    for (std::size_t k = 1; k < detail.keyframes.indices.size(); ++k) {
        const Vec2 prev = centers.back();
        bool accepted = false;
        int attempts = 0;
        while (attempts < kKeyframeRetryCap) {
            ++attempts;
            Vec2 cand{rng.uniform(0.0, cfg.width), rng.uniform(0.0, cfg.height)};
            const double d = std::hypot(cand.x - prev.x, cand.y - prev.y);
            if (d >= cfg.delta_min && d <= cfg.delta_max) {
                centers.push_back(cand);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw GenerationFailedError(
                "linear trajectory: no keyframe placement satisfying displacement "
                "bounds after " + std::to_string(attempts) + " attempts",
                attempts);
        }
    }
    detail.trajectory.centers =
        interpolate_keyframes(detail.keyframes, centers, cfg.frames);
    return detail;
}

Trajectory linear_trajectory(const MotionConfig& cfg, std::uint64_t seed) {
    return linear_trajectory_detailed(cfg, seed).trajectory;
}

std::vector<double> gaussian_smooth(std::span<const double> values, double sigma) {
    if (values.empty()) {
        throw InvalidInputError("gaussian_smooth: empty input");
    }
    if (sigma <= 0.0) {
        throw InvalidConfigError("gaussian_smooth: sigma must be positive");
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        kernel[k + radius] = w;
        sum += w;
    }
    for (double& w : kernel) {
        w /= sum;
    }
    const int n = static_cast<int>(values.size());
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            acc += kernel[k + radius] * values[reflect_index(i + k, n)];
        }
        out[i] = acc;
    }
    return out;
}

std::vector<double> resample(std::span<const double> values, int target_length) {
    if (values.empty()) {
        throw InvalidInputError("resample: empty input");
    }
    if (target_length < 1) {
        throw InvalidConfigError("resample: target length must be >= 1");
    }
    const int n = static_cast<int>(values.size());
    std::vector<double> out(target_length);
    if (target_length == 1) {
        out[0] = values[0];
        return out;
    }
    const double step = static_cast<double>(n - 1) / static_cast<double>(target_length - 1);
    for (int j = 0; j < target_length; ++j) {
        const double pos = j * step;
        const int i0 = std::min(static_cast<int>(pos), n - 1);
        const int i1 = std::min(i0 + 1, n - 1);
        const double frac = pos - i0;
        out[j] = (1.0 - frac) * values[i0] + frac * values[i1];
    }
    return out;
}

NonlinearTrajectoryDetail nonlinear_trajectory_detailed(const MotionConfig& cfg,
                                                        std::uint64_t seed) {
    validate_common(cfg);
    if (cfg.oversample <= cfg.frames) {
        throw InvalidConfigError("motion config: oversample count must exceed frames");
    }
    if (cfg.sigma <= 0.0) {
        throw InvalidConfigError("motion config: sigma must be positive");
    }
    NonlinearTrajectoryDetail detail;
    Rng rng(seed);
    detail.raw_x.resize(cfg.oversample);
    detail.raw_y.resize(cfg.oversample);
    for (int i = 0; i < cfg.oversample; ++i) {
        detail.raw_x[i] = rng.uniform(0.0, cfg.width);
        detail.raw_y[i] = rng.uniform(0.0, cfg.height);
    }
    detail.smoothed_x = gaussian_smooth(detail.raw_x, cfg.sigma);
    detail.smoothed_y = gaussian_smooth(detail.raw_y, cfg.sigma);
    const std::vector<double> xs = resample(detail.smoothed_x, cfg.frames);
    const std::vector<double> ys = resample(detail.smoothed_y, cfg.frames);
    detail.trajectory.centers.resize(cfg.frames);
    for (int i = 0; i < cfg.frames; ++i) {
        detail.trajectory.centers[i].x = std::clamp(xs[i], 0.0, static_cast<double>(cfg.width));
        detail.trajectory.centers[i].y = std::clamp(ys[i], 0.0, static_cast<double>(cfg.height));
    }
    return detail;
}

Trajectory nonlinear_trajectory(const MotionConfig& cfg, std::uint64_t seed) {
    return nonlinear_trajectory_detailed(cfg, seed).trajectory;
}

Trajectory make_trajectory(const MotionConfig& cfg, std::uint64_t seed) {
    switch (cfg.kind) {
        case MotionKind::kStatic: return static_trajectory(cfg, seed);
        case MotionKind::kLinear: return linear_trajectory(cfg, seed);
        case MotionKind::kNonlinear: return nonlinear_trajectory(cfg, seed);
    }
    throw InvalidConfigError("unknown motion kind");
}

}  // namespace tubelet
