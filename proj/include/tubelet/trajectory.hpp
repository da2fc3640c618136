#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tubelet/clip.hpp"

namespace tubelet {

enum class MotionKind { kStatic, kLinear, kNonlinear };

MotionKind motion_kind_from_string(const std::string& name);
std::string to_string(MotionKind kind);

// Frame indices at which trajectory centers (or transform parameters) are
// sampled. Indices are 0-based throughout the code; the first frame (0) and
// the last frame (T−1) are always members.
struct KeyframeSet {
    std::vector<int> indices;  // strictly increasing, indices[0]=0, back()=T−1
};

// A length-T sequence of sub-pixel center coordinates.
struct Trajectory {
    std::vector<Vec2> centers;
    int length() const { return static_cast<int>(centers.size()); }
};

struct MotionConfig {
    MotionKind kind = MotionKind::kNonlinear;
    int frames = 16;       // T
    int width = 32;        // W, pixels
    int height = 32;       // H, pixels
    int keyframes = 3;     // K (linear only)
    double delta_min = 40.0;  // linear: min keyframe displacement, pixels
    double delta_max = 80.0;  // linear: max keyframe displacement, pixels
    int oversample = 48;   // N (nonlinear only), must exceed frames
    double sigma = 8.0;    // smoothing factor in samples (nonlinear only)
};

// {0, T−1} ∪ (K−2 distinct frames drawn uniformly without replacement from
// [1, T−2]), sorted ascending. Deterministic in seed.
KeyframeSet sample_keyframes(int frames, int keyframes, std::uint64_t seed);

// One center drawn uniformly from [0,W)×[0,H); all T entries equal it.
Trajectory static_trajectory(const MotionConfig& cfg, std::uint64_t seed);

// Keyframe centers drawn uniformly subject to consecutive displacements in
// [delta_min, delta_max] (rejection sampling, per-keyframe retry cap 1000);
// remaining frames linearly interpolated by frame-index fraction.
Trajectory linear_trajectory(const MotionConfig& cfg, std::uint64_t seed);

struct LinearTrajectoryDetail {
    Trajectory trajectory;
    KeyframeSet keyframes;
    std::vector<Vec2> keyframe_centers;
};
LinearTrajectoryDetail linear_trajectory_detailed(const MotionConfig& cfg,
                                                  std::uint64_t seed);

// N raw coordinates drawn uniformly, smoothed per axis with a 1D Gaussian,
// resampled to T points, clamped into frame bounds.
Trajectory nonlinear_trajectory(const MotionConfig& cfg, std::uint64_t seed);

struct NonlinearTrajectoryDetail {
    Trajectory trajectory;
    std::vector<double> raw_x, raw_y;            // the N uniform draws
    std::vector<double> smoothed_x, smoothed_y;  // after gaussian_smooth
};
NonlinearTrajectoryDetail nonlinear_trajectory_detailed(const MotionConfig& cfg,
                                                        std::uint64_t seed);

// Dispatch on cfg.kind.
Trajectory make_trajectory(const MotionConfig& cfg, std::uint64_t seed);

// Discrete Gaussian convolution: kernel truncated at radius ceil(3σ), weights
// normalized to sum 1, reflect boundary padding (index −1 maps to 0). Output
// length equals input length.
std::vector<double> gaussian_smooth(std::span<const double> values, double sigma);

// Piecewise-linear interpolant of the input evaluated at target_length
// positions spaced uniformly over [0, N−1], endpoints included.
std::vector<double> resample(std::span<const double> values, int target_length);

// Values at keyframe indices held fixed, remaining frames interpolated
// componentwise by frame-index fraction. Shared by trajectories and
// transformation tracks.
std::vector<Vec2> interpolate_keyframes(const KeyframeSet& keys,
                                        const std::vector<Vec2>& key_values,
                                        int frames);

}  // namespace tubelet
