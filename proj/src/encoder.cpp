#include "tubelet/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "tubelet/error.hpp"
#include "tubelet/rng.hpp"

namespace tubelet {

std::vector<double> matvec(const Matrix& w, const std::vector<double>& x,
                           const std::vector<double>& b) {
    std::vector<double> y(w.rows);
    for (int r = 0; r < w.rows; ++r) {
        const double* row = &w.a[static_cast<std::size_t>(r) * w.cols];
        double acc = b[r];
        for (int c = 0; c < w.cols; ++c) {
            acc += row[c] * x[c];
        }
        y[r] = acc;
    }
    return y;
}

std::vector<double> matvec_transposed(const Matrix& w, const std::vector<double>& g) {
    std::vector<double> y(w.cols, 0.0);
    for (int r = 0; r < w.rows; ++r) {
        const double* row = &w.a[static_cast<std::size_t>(r) * w.cols];
        const double gr = g[r];
        for (int c = 0; c < w.cols; ++c) {
            y[c] += row[c] * gr;
        }
    }
    return y;
}

void EncoderGrads::add_scaled(const EncoderGrads& other, double factor) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].a.size(); ++i) {
            weights[l].a[i] += factor * other.weights[l].a[i];
        }
        for (std::size_t i = 0; i < biases[l].size(); ++i) {
            biases[l][i] += factor * other.biases[l][i];
        }
    }
}

void EncoderGrads::scale(double factor) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (double& v : weights[l].a) {
            v *= factor;
        }
        for (double& v : biases[l]) {
            v *= factor;
        }
    }
}

EncoderGrads zero_grads(const EncoderParams& params) {
    EncoderGrads g;
    for (int l = 0; l < params.layer_count(); ++l) {
        g.weights.emplace_back(params.weights[l].rows, params.weights[l].cols);
        g.biases.emplace_back(params.biases[l].size(), 0.0);
    }
    return g;
}

EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed) {
    if (config.grid_t < 1 || config.grid_h < 1 || config.grid_w < 1 ||
        config.hidden < 1 || config.embed < 1) {
        throw InvalidConfigError("encoder config: all dimensions must be positive");
    }
    EncoderParams params;
    params.config = config;
    const int dims[5] = {config.input_dim(), config.hidden, config.hidden,
                         config.hidden, config.embed};
    Rng rng(seed);
    for (int l = 0; l < 4; ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (double& v : w.a) {
            v = rng.uniform(-bound, bound);
        }
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(fan_out, 0.0);
    }
    return params;
}

std::vector<double> featurize(const Clip& clip, const EncoderConfig& config) {
    if (clip.frames < config.grid_t || clip.height < config.grid_h ||
        clip.width < config.grid_w) {
        throw InvalidInputError("featurize: clip smaller than the encoder grid");
    }
    const int gt = config.grid_t;
    const int gh = config.grid_h;
    const int gw = config.grid_w;
    const int cell = gh * gw * 3;
    std::vector<double> raw(static_cast<std::size_t>(gt) * cell, 0.0);
    for (int it = 0; it < gt; ++it) {
        const int t0 = it * clip.frames / gt;
        const int t1 = std::max(t0 + 1, (it + 1) * clip.frames / gt);
        for (int iy = 0; iy < gh; ++iy) {
            const int y0 = iy * clip.height / gh;
            const int y1 = std::max(y0 + 1, (iy + 1) * clip.height / gh);
            for (int ix = 0; ix < gw; ++ix) {
                const int x0 = ix * clip.width / gw;
                const int x1 = std::max(x0 + 1, (ix + 1) * clip.width / gw);
                double acc[3] = {0.0, 0.0, 0.0};
                int count = 0;
                for (int t = t0; t < t1; ++t) {
                    for (int y = y0; y < y1; ++y) {
                        for (int x = x0; x < x1; ++x) {
                            for (int c = 0; c < 3; ++c) {
                                acc[c] += clip.at(t, y, x, c);
                            }
                            ++count;
                        }
                    }
                }
                const std::size_t base =
                    (static_cast<std::size_t>(it) * gh * gw + static_cast<std::size_t>(iy) * gw + ix) * 3;
                for (int c = 0; c < 3; ++c) {
                    raw[base + c] = acc[c] / (255.0 * count);
                }
            }
        }
    }
    std::vector<double> features(raw.size() * 2, 0.0);
    std::copy(raw.begin(), raw.end(), features.begin());
    // Temporal differences; grid frame 0 has none.
    for (int it = 1; it < gt; ++it) {
        for (int i = 0; i < cell; ++i) {
            features[raw.size() + static_cast<std::size_t>(it) * cell + i] =
                raw[static_cast<std::size_t>(it) * cell + i] -
                raw[static_cast<std::size_t>(it - 1) * cell + i];
        }
    }
    return features;
}

EncoderActivations encode_forward(const EncoderParams& params,
                                  const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != params.config.input_dim()) {
        throw InvalidInputError("encode: input dimension mismatch");
    }
    EncoderActivations acts;
    acts.input = input;
    const int layers = params.layer_count();
    acts.pre.resize(layers);
    acts.post.resize(layers);
    const std::vector<double>* x = &acts.input;
    for (int l = 0; l < layers; ++l) {
        acts.pre[l] = matvec(params.weights[l], *x, params.biases[l]);
        if (l + 1 < layers) {
            acts.post[l] = acts.pre[l];
            for (double& v : acts.post[l]) {
                v = std::max(v, 0.0);
            }
        } else {
            acts.post[l] = acts.pre[l];  // final layer is linear
        }
        x = &acts.post[l];
    }
    acts.embedding = acts.post[layers - 1];
    acts.output_norm = norm(acts.embedding);
    if (acts.output_norm > 0.0) {
        for (double& v : acts.embedding) {
            v /= acts.output_norm;
        }
    }
    return acts;
}

Embedding encode(const EncoderParams& params, const Clip& clip) {
    return encode_forward(params, featurize(clip, params.config)).embedding;
}

EncoderGrads encode_backward(const EncoderParams& params,
                             const EncoderActivations& acts,
                             const std::vector<double>& embedding_grad) {
    const int layers = params.layer_count();
    EncoderGrads grads = zero_grads(params);

    // Through z = z' / ‖z'‖:  dz' = (g − z (z·g)) / ‖z'‖
    const double zg = dot(acts.embedding, embedding_grad);
    std::vector<double> delta(embedding_grad.size());
    for (std::size_t i = 0; i < delta.size(); ++i) {
        delta[i] = (embedding_grad[i] - acts.embedding[i] * zg) / acts.output_norm;
    }

    for (int l = layers - 1; l >= 0; --l) {
        if (l + 1 < layers) {
            for (std::size_t i = 0; i < delta.size(); ++i) {
                if (acts.pre[l][i] <= 0.0) {
                    delta[i] = 0.0;
                }
            }
        }
        const std::vector<double>& below = (l == 0) ? acts.input : acts.post[l - 1];
        Matrix& wg = grads.weights[l];
        for (int r = 0; r < wg.rows; ++r) {
            const double d = delta[r];
            if (d == 0.0) {
                continue;
            }
            double* row = &wg.a[static_cast<std::size_t>(r) * wg.cols];
            for (int c = 0; c < wg.cols; ++c) {
                row[c] += d * below[c];
            }
        }
        for (std::size_t i = 0; i < delta.size(); ++i) {
            grads.biases[l][i] += delta[i];
        }
        if (l > 0) {
            delta = matvec_transposed(params.weights[l], delta);
        }
    }
    return grads;
}

double dot(const Embedding& a, const Embedding& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double norm(const Embedding& a) { return std::sqrt(dot(a, a)); }

void normalize(Embedding& a) {
    const double n = norm(a);
    if (n > 0.0) {
        for (double& v : a) {
            v /= n;
        }
    }
}

}  // namespace tubelet
