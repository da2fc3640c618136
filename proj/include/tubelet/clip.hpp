#pragma once

#include <cstdint>
#include <vector>

#include "tubelet/error.hpp"

namespace tubelet {

struct Vec2 {
    double x = 0.0;  // horizontal, pixels
    double y = 0.0;  // vertical, pixels
};

// A video clip: T frames of H×W RGB pixels, frame-major, row-major,
// channel-interleaved. The unit of all video processing.
struct Clip {
    int frames = 0;  // T
    int height = 0;  // H
    int width = 0;   // W
    std::vector<std::uint8_t> pixels;  // frames*height*width*3
    double frame_rate = 30.0;          // informational only

    Clip() = default;
    Clip(int t, int h, int w, std::uint8_t fill = 0)
        : frames(t), height(h), width(w),
          pixels(static_cast<std::size_t>(t) * h * w * 3, fill) {
        if (t < 1 || h < 1 || w < 1) {
            throw InvalidConfigError("clip dimensions must be positive");
        }
    }

    std::size_t index(int t, int y, int x, int c) const {
        return ((static_cast<std::size_t>(t) * height + y) * width + x) * 3 + c;
    }
    std::uint8_t at(int t, int y, int x, int c) const { return pixels[index(t, y, x, c)]; }
    std::uint8_t& at(int t, int y, int x, int c) { return pixels[index(t, y, x, c)]; }

    bool same_shape(const Clip& other) const {
        return frames == other.frames && height == other.height && width == other.width;
    }
};

// Per-frame coverage values in [0, 1], same spatial layout as a clip but
// single-channel.
struct CoverageMask {
    int frames = 0;
    int height = 0;
    int width = 0;
    std::vector<float> values;

    CoverageMask() = default;
    CoverageMask(int t, int h, int w)
        : frames(t), height(h), width(w),
          values(static_cast<std::size_t>(t) * h * w, 0.0f) {}

    std::size_t index(int t, int y, int x) const {
        return (static_cast<std::size_t>(t) * height + y) * width + x;
    }
    float at(int t, int y, int x) const { return values[index(t, y, x)]; }
    float& at(int t, int y, int x) { return values[index(t, y, x)]; }
};

}  // namespace tubelet
