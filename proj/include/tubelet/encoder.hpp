#pragma once

#include <cstdint>
#include <vector>

#include "tubelet/clip.hpp"

namespace tubelet {

// Minimal dense matrix, row-major.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
};

// y = W x + b
std::vector<double> matvec(const Matrix& w, const std::vector<double>& x,
                           const std::vector<double>& b);
// x_grad = Wᵀ g
std::vector<double> matvec_transposed(const Matrix& w, const std::vector<double>& g);

struct EncoderConfig {
    int grid_t = 8;
    int grid_h = 8;
    int grid_w = 8;
    int hidden = 256;   // trunk and head hidden width
    int embed = 128;    // D

    // Raw channels plus temporal-difference channels.
    int input_dim() const { return grid_t * grid_h * grid_w * 6; }
};

// Trunk (input → hidden → hidden) and 2-layer projection head
// (hidden → hidden → embed), rectifier nonlinearities, L2-normalized output.
struct EncoderParams {
    EncoderConfig config;
    std::vector<Matrix> weights;             // 4 layers
    std::vector<std::vector<double>> biases; // 4 layers

    int layer_count() const { return static_cast<int>(weights.size()); }
};

// Per-layer gradient accumulator, same shapes as the parameters.
struct EncoderGrads {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    void add_scaled(const EncoderGrads& other, double factor);
    void scale(double factor);
};

EncoderGrads zero_grads(const EncoderParams& params);

// Seeded uniform initialization in ±sqrt(6/(fan_in+fan_out)) per layer,
// zero biases.
EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed);

// The clip as the encoder sees it: area-average downsample to the
// (grid_t, grid_h, grid_w) grid, intensities scaled to [0, 1], with
// temporal-difference channels (frame t minus frame t−1, zero for t = 0)
// concatenated after the raw channels. Layout: raw grid t-major then y, x,
// channel, followed by the difference grid in the same order.
std::vector<double> featurize(const Clip& clip, const EncoderConfig& config);

using Embedding = std::vector<double>;

struct EncoderActivations {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post-activation per layer
    Embedding embedding;                    // L2-normalized output
    double output_norm = 0.0;
};

EncoderActivations encode_forward(const EncoderParams& params,
                                  const std::vector<double>& input);

// Deterministic forward pass; output has unit Euclidean norm.
Embedding encode(const EncoderParams& params, const Clip& clip);

// Backpropagates d(loss)/d(embedding) through the normalization and all
// layers; returns gradients for every weight and bias.
EncoderGrads encode_backward(const EncoderParams& params,
                             const EncoderActivations& acts,
                             const std::vector<double>& embedding_grad);

double dot(const Embedding& a, const Embedding& b);
double norm(const Embedding& a);
void normalize(Embedding& a);

}  // namespace tubelet
