// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_NET_HPP
#define BANKREAD_NET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bankread/image.hpp"
#include "bankread/parallel.hpp"
#include "bankread/prng.hpp"
#include "bankread/tensor.hpp"

namespace bankread {

enum class OptimizerKind { adam, sgd };

// Architecture and training knobs of the classifier:
//   conv(k,k,conv1) -> ReLU -> maxpool -> conv(k,k,conv2) -> ReLU ->
//   maxpool -> flatten -> dense(dense_units) -> ReLU -> dense(num_classes)
//   -> softmax
// Convolutions are valid (no padding), stride 1; pooling is max with a
// square window and matching stride.
struct ModelConfig {
    int input_h = 64;
    int input_w = 64;
    int conv1_filters = 32;
    int conv2_filters = 128;
    int kernel = 3;
    int pool = 2;
    int dense_units = 128;
    int num_classes = 61;
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 5;
};

// Spatial dimensions at each stage of the stack.
struct LayerDims {
    int conv1_h = 0, conv1_w = 0;
    int pool1_h = 0, pool1_w = 0;
    int conv2_h = 0, conv2_w = 0;
    int pool2_h = 0, pool2_w = 0;
    int flat = 0;
};

inline LayerDims compute_dims(const ModelConfig& cfg) {
    if (cfg.num_classes < 2)
        throw InvalidArgument("ModelConfig: num_classes must be >= 2");
    if (cfg.conv1_filters < 1 || cfg.conv2_filters < 1 || cfg.dense_units < 1 ||
        cfg.kernel < 1 || cfg.pool < 1 || cfg.batch_size < 1)
        throw InvalidArgument("ModelConfig: all counts must be >= 1");
    if (cfg.epochs < 0)
        throw InvalidArgument("ModelConfig: epochs must be >= 0");
    if (cfg.input_h < 1 || cfg.input_w < 1)
        throw InvalidArgument("ModelConfig: input dimensions must be >= 1");
    LayerDims d;
    d.conv1_h = cfg.input_h - cfg.kernel + 1;
    d.conv1_w = cfg.input_w - cfg.kernel + 1;
    if (d.conv1_h < 1 || d.conv1_w < 1)
        throw InvalidArgument("ModelConfig: kernel " + std::to_string(cfg.kernel) +
                              " larger than input " + std::to_string(cfg.input_w) + "x" +
                              std::to_string(cfg.input_h));
    d.pool1_h = d.conv1_h / cfg.pool;
    d.pool1_w = d.conv1_w / cfg.pool;
    if (d.pool1_h < 1 || d.pool1_w < 1)
        throw InvalidArgument("ModelConfig: first pooling collapses the feature map");
    d.conv2_h = d.pool1_h - cfg.kernel + 1;
    d.conv2_w = d.pool1_w - cfg.kernel + 1;
    if (d.conv2_h < 1 || d.conv2_w < 1)
        throw InvalidArgument("ModelConfig: kernel larger than first pooled map");
    d.pool2_h = d.conv2_h / cfg.pool;
    d.pool2_w = d.conv2_w / cfg.pool;
    if (d.pool2_h < 1 || d.pool2_w < 1)
        throw InvalidArgument("ModelConfig: second pooling collapses the feature map");
    d.flat = d.pool2_h * d.pool2_w * cfg.conv2_filters;
    return d;
}

// Per-class probabilities out of the softmax layer.
struct PredictionVector {
    std::vector<double> probabilities;
    int class_count() const { return static_cast<int>(probabilities.size()); }
};

// Layer stack and weights. Dense weights are stored input-major
// ([in_features][out_units]) so the forward pass is a plain row-major
// matrix product.
template <class T>
struct Model {
    ModelConfig config;
    Tensor<T> conv1_w; // [conv1][1][k][k]
    Tensor<T> conv1_b; // [conv1]
    Tensor<T> conv2_w; // [conv2][conv1][k][k]
    Tensor<T> conv2_b; // [conv2]
    Tensor<T> fc1_w;   // [flat][dense]
    Tensor<T> fc1_b;   // [dense]
    Tensor<T> fc2_w;   // [dense][classes]
    Tensor<T> fc2_b;   // [classes]
    bool trained = false;

    std::vector<Tensor<T>*> parameters() {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
    }
    std::vector<const Tensor<T>*> parameters() const {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
    }
};

// Weight tensors drawn uniformly from the fan-in-scaled bound
// +-sqrt(6/fan_in), biases zero, one splitmix64 stream consumed in
// parameter order: conv1_w, conv2_w, fc1_w, fc2_w. Identical seeds yield
// bit-identical models.
template <class T>
Model<T> init_model(const ModelConfig& cfg, std::uint64_t seed) {
    const LayerDims dims = compute_dims(cfg);
    Model<T> model;
    model.config = cfg;
    const std::size_t k = static_cast<std::size_t>(cfg.kernel);
    model.conv1_w.reshape({static_cast<std::size_t>(cfg.conv1_filters), 1, k, k});
    model.conv1_b.reshape({static_cast<std::size_t>(cfg.conv1_filters)});
    model.conv2_w.reshape({static_cast<std::size_t>(cfg.conv2_filters),
                           static_cast<std::size_t>(cfg.conv1_filters), k, k});
    model.conv2_b.reshape({static_cast<std::size_t>(cfg.conv2_filters)});
    model.fc1_w.reshape({static_cast<std::size_t>(dims.flat),
                         static_cast<std::size_t>(cfg.dense_units)});
    model.fc1_b.reshape({static_cast<std::size_t>(cfg.dense_units)});
    model.fc2_w.reshape({static_cast<std::size_t>(cfg.dense_units),
                         static_cast<std::size_t>(cfg.num_classes)});
    model.fc2_b.reshape({static_cast<std::size_t>(cfg.num_classes)});

    SplitMix64 rng(seed);
    auto fill_uniform = [&](Tensor<T>& t, double fan_in) {
        const double bound = std::sqrt(6.0 / fan_in);
        for (auto& w : t.v) w = static_cast<T>(rng.next_uniform(-bound, bound));
    };
    fill_uniform(model.conv1_w, 1.0 * k * k);
    fill_uniform(model.conv2_w, static_cast<double>(cfg.conv1_filters) * k * k);
    fill_uniform(model.fc1_w, static_cast<double>(dims.flat));
    fill_uniform(model.fc2_w, static_cast<double>(cfg.dense_units));
    return model;
}

namespace detail {

// Rows per register tile and accumulator elements per row. NR spans two
// 64-byte vector registers for floats, keeping the whole MR x NR tile in
// registers through the k loop.
template <class T>
struct GemmTile {
    static constexpr std::size_t rows = 4;
    static constexpr std::size_t cols = sizeof(T) == 4 ? 32 : 16;
};

// One MR x NR output tile: accumulate over k entirely in registers, then
// flush. MR is a runtime-bounded template dispatch so edge rows follow the
// same accumulation order as full tiles.
template <class T, std::size_t MR>
void gemm_tile(const T* A, const T* B, T* C, std::size_t K, std::size_t N) {
    constexpr std::size_t NR = GemmTile<T>::cols;
    T acc[MR][NR];
    for (std::size_t i = 0; i < MR; ++i)
        for (std::size_t j = 0; j < NR; ++j) acc[i][j] = T(0);
    for (std::size_t k = 0; k < K; ++k) {
        const T* brow = B + k * N;
        for (std::size_t i = 0; i < MR; ++i) {
            const T a = A[i * K + k];
            for (std::size_t j = 0; j < NR; ++j) acc[i][j] += a * brow[j];
        }
    }
    for (std::size_t i = 0; i < MR; ++i)
        for (std::size_t j = 0; j < NR; ++j) C[i * N + j] += acc[i][j];
}

// C (M x N) = A (M x K) * B (K x N), or += when accumulate is set. Each
// output element is one k-ascending accumulation chain regardless of tile
// placement or thread count, so results are bit-identical for any batch
// size and any parallelism.
template <class T>
void matmul(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N,
            bool accumulate, bool threaded = true) {
    constexpr std::size_t MR = GemmTile<T>::rows;
    constexpr std::size_t NR = GemmTile<T>::cols;
    if (!accumulate)
        for (std::size_t i = 0; i < M * N; ++i) C[i] = T(0);

    auto row_block = [&](std::size_t block) {
        const std::size_t m = block * MR;
        const std::size_t mr = std::min(MR, M - m);
        const T* a = A + m * K;
        T* c = C + m * N;
        std::size_t n = 0;
        for (; n + NR <= N; n += NR) {
            switch (mr) {
                case 4: gemm_tile<T, 4>(a, B + n, c + n, K, N); break;
                case 3: gemm_tile<T, 3>(a, B + n, c + n, K, N); break;
                case 2: gemm_tile<T, 2>(a, B + n, c + n, K, N); break;
                default: gemm_tile<T, 1>(a, B + n, c + n, K, N); break;
            }
        }
        // column tail: same k-ascending chain per element
        for (std::size_t i = 0; i < mr; ++i) {
            for (std::size_t j = n; j < N; ++j) {
                T s = T(0);
                const T* arow = a + i * K;
                for (std::size_t k = 0; k < K; ++k) s += arow[k] * B[k * N + j];
                c[i * N + j] += s;
            }
        }
    };

    const std::size_t blocks = (M + MR - 1) / MR;
    if (threaded)
        parallel_for(0, blocks, row_block);
    else
        for (std::size_t b = 0; b < blocks; ++b) row_block(b);
}

template <class T>
void transpose(const T* src, T* dst, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            dst[c * rows + r] = src[r * cols + c];
}

// Valid-convolution patch matrix: cols[(ic*k*k + ky*k + kx)][oy*ow + ox]
// = img[ic][oy+ky][ox+kx].
template <class T>
void im2col(const T* img, int channels, int ih, int iw, int k, T* cols) {
    const int oh = ih - k + 1;
    const int ow = iw - k + 1;
    const std::size_t patch = static_cast<std::size_t>(oh) * ow;
    std::size_t row = 0;
    for (int c = 0; c < channels; ++c) {
        const T* plane = img + static_cast<std::size_t>(c) * ih * iw;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx, ++row) {
                T* dst = cols + row * patch;
                for (int oy = 0; oy < oh; ++oy) {
                    const T* srcrow = plane + static_cast<std::size_t>(oy + ky) * iw + kx;
                    for (int ox = 0; ox < ow; ++ox) dst[static_cast<std::size_t>(oy) * ow + ox] = srcrow[ox];
                }
            }
        }
    }
}

// Scatter-add inverse of im2col, used to push conv gradients back to the
// input feature map.
template <class T>
void col2im_add(const T* cols, int channels, int ih, int iw, int k, T* img) {
    const int oh = ih - k + 1;
    const int ow = iw - k + 1;
    const std::size_t patch = static_cast<std::size_t>(oh) * ow;
    std::size_t row = 0;
    for (int c = 0; c < channels; ++c) {
        T* plane = img + static_cast<std::size_t>(c) * ih * iw;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx, ++row) {
                const T* src = cols + row * patch;
                for (int oy = 0; oy < oh; ++oy) {
                    T* dstrow = plane + static_cast<std::size_t>(oy + ky) * iw + kx;
                    for (int ox = 0; ox < ow; ++ox) dstrow[ox] += src[static_cast<std::size_t>(oy) * ow + ox];
                }
            }
        }
    }
}

template <class T>
void add_bias_relu(T* out, const T* bias, int channels, std::size_t plane, bool relu) {
    for (int c = 0; c < channels; ++c) {
        T* p = out + static_cast<std::size_t>(c) * plane;
        const T b = bias[c];
        for (std::size_t i = 0; i < plane; ++i) {
            T v = p[i] + b;
            if (relu && v < T(0)) v = T(0);
            p[i] = v;
        }
    }
}

// Max pooling with window == stride. Ties go to the first element in
// row-major window order; the winning flat index is recorded for backward.
template <class T>
void maxpool_forward(const T* in, int channels, int ih, int iw, int pool, T* out, int* idx) {
    const int oh = ih / pool;
    const int ow = iw / pool;
    for (int c = 0; c < channels; ++c) {
        const T* plane = in + static_cast<std::size_t>(c) * ih * iw;
        T* oplane = out + static_cast<std::size_t>(c) * oh * ow;
        int* iplane = idx + static_cast<std::size_t>(c) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                T best = plane[static_cast<std::size_t>(oy * pool) * iw + ox * pool];
                int best_at = oy * pool * iw + ox * pool;
                for (int py = 0; py < pool; ++py) {
                    for (int px = 0; px < pool; ++px) {
                        const int at = (oy * pool + py) * iw + (ox * pool + px);
                        const T v = plane[at];
                        if (v > best) {
                            best = v;
                            best_at = at;
                        }
                    }
                }
                oplane[static_cast<std::size_t>(oy) * ow + ox] = best;
                iplane[static_cast<std::size_t>(oy) * ow + ox] = best_at;
            }
        }
    }
}

template <class T>
void maxpool_backward(const T* dout, const int* idx, int channels, int ih, int iw, int pool,
                      T* din) {
    const int oh = ih / pool;
    const int ow = iw / pool;
    for (int c = 0; c < channels; ++c) {
        const T* doplane = dout + static_cast<std::size_t>(c) * oh * ow;
        const int* iplane = idx + static_cast<std::size_t>(c) * oh * ow;
        T* diplane = din + static_cast<std::size_t>(c) * ih * iw;
        for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i)
            diplane[iplane[i]] += doplane[i];
    }
}

// Row-wise softmax with max subtraction.
template <class T>
void softmax_rows(const T* logits, T* probs, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T* in = logits + r * cols;
        T* out = probs + r * cols;
        T mx = in[0];
        for (std::size_t c = 1; c < cols; ++c)
            if (in[c] > mx) mx = in[c];
        T sum = T(0);
        for (std::size_t c = 0; c < cols; ++c) {
            out[c] = std::exp(in[c] - mx);
            sum += out[c];
        }
        for (std::size_t c = 0; c < cols; ++c) out[c] /= sum;
    }
}

} // namespace detail

// Activations and patch matrices kept from a forward pass for backprop.
template <class T>
struct ForwardCache {
    int n = 0;
    std::vector<T> input;     // n x 1 x H x W
    std::vector<T> cols1;     // n x (k*k) x (conv1_h*conv1_w)
    std::vector<T> conv1_out; // post-ReLU
    std::vector<T> pool1_out;
    std::vector<int> pool1_idx;
    std::vector<T> cols2; // n x (conv1*k*k) x (conv2_h*conv2_w)
    std::vector<T> conv2_out;
    std::vector<T> pool2_out; // n x flat (flatten happens here)
    std::vector<int> pool2_idx;
    std::vector<T> fc1_out; // post-ReLU
    std::vector<T> logits;
    std::vector<T> probs;
};

// Forward pass over a batch laid out as n contiguous H*W planes.
template <class T>
void forward_batch(const Model<T>& model, const T* images, int n, ForwardCache<T>& cache) {
    const ModelConfig& cfg = model.config;
    const LayerDims dims = compute_dims(cfg);
    const std::size_t in_plane = static_cast<std::size_t>(cfg.input_h) * cfg.input_w;
    const std::size_t k1 = static_cast<std::size_t>(cfg.kernel) * cfg.kernel;
    const std::size_t p1 = static_cast<std::size_t>(dims.conv1_h) * dims.conv1_w;
    const std::size_t pool1_plane = static_cast<std::size_t>(dims.pool1_h) * dims.pool1_w;
    const std::size_t k2 = static_cast<std::size_t>(cfg.conv1_filters) * cfg.kernel * cfg.kernel;
    const std::size_t p2 = static_cast<std::size_t>(dims.conv2_h) * dims.conv2_w;
    const std::size_t pool2_plane = static_cast<std::size_t>(dims.pool2_h) * dims.pool2_w;
    const std::size_t nn = static_cast<std::size_t>(n);

    cache.n = n;
    cache.input.assign(images, images + nn * in_plane);
    cache.cols1.resize(nn * k1 * p1);
    cache.conv1_out.resize(nn * cfg.conv1_filters * p1);
    cache.pool1_out.resize(nn * cfg.conv1_filters * pool1_plane);
    cache.pool1_idx.resize(nn * cfg.conv1_filters * pool1_plane);
    cache.cols2.resize(nn * k2 * p2);
    cache.conv2_out.resize(nn * cfg.conv2_filters * p2);
    cache.pool2_out.resize(nn * static_cast<std::size_t>(dims.flat));
    cache.pool2_idx.resize(nn * cfg.conv2_filters * pool2_plane);
    cache.fc1_out.resize(nn * cfg.dense_units);
    cache.logits.resize(nn * cfg.num_classes);
    cache.probs.resize(nn * cfg.num_classes);

    // Convolution stages are independent per sample.
    parallel_for(0, nn, [&](std::size_t s) {
        // conv1 + ReLU
        T* cols1 = cache.cols1.data() + s * k1 * p1;
        detail::im2col(cache.input.data() + s * in_plane, 1, cfg.input_h, cfg.input_w, cfg.kernel,
                       cols1);
        T* c1out = cache.conv1_out.data() + s * cfg.conv1_filters * p1;
        detail::matmul(model.conv1_w.data(), cols1, c1out,
                       static_cast<std::size_t>(cfg.conv1_filters), k1, p1, false, false);
        detail::add_bias_relu(c1out, model.conv1_b.data(), cfg.conv1_filters, p1, true);
        // pool1
        T* p1out = cache.pool1_out.data() + s * cfg.conv1_filters * pool1_plane;
        int* p1idx = cache.pool1_idx.data() + s * cfg.conv1_filters * pool1_plane;
        detail::maxpool_forward(c1out, cfg.conv1_filters, dims.conv1_h, dims.conv1_w, cfg.pool,
                                p1out, p1idx);
        // conv2 + ReLU
        T* cols2 = cache.cols2.data() + s * k2 * p2;
        detail::im2col(p1out, cfg.conv1_filters, dims.pool1_h, dims.pool1_w, cfg.kernel, cols2);
        T* c2out = cache.conv2_out.data() + s * cfg.conv2_filters * p2;
        detail::matmul(model.conv2_w.data(), cols2, c2out,
                       static_cast<std::size_t>(cfg.conv2_filters), k2, p2, false, false);
        detail::add_bias_relu(c2out, model.conv2_b.data(), cfg.conv2_filters, p2, true);
        // pool2 == flatten
        T* p2out = cache.pool2_out.data() + s * static_cast<std::size_t>(dims.flat);
        int* p2idx = cache.pool2_idx.data() + s * cfg.conv2_filters * pool2_plane;
        detail::maxpool_forward(c2out, cfg.conv2_filters, dims.conv2_h, dims.conv2_w, cfg.pool,
                                p2out, p2idx);
    });

    // fc1 + ReLU: [n x flat] * [flat x dense]
    detail::matmul(cache.pool2_out.data(), model.fc1_w.data(), cache.fc1_out.data(), nn,
                   static_cast<std::size_t>(dims.flat), static_cast<std::size_t>(cfg.dense_units),
                   false);
    for (std::size_t s = 0; s < nn; ++s) {
        T* row = cache.fc1_out.data() + s * cfg.dense_units;
        for (int j = 0; j < cfg.dense_units; ++j) {
            T v = row[j] + model.fc1_b.v[static_cast<std::size_t>(j)];
            row[j] = v < T(0) ? T(0) : v;
        }
    }

    // fc2 logits: [n x dense] * [dense x classes]
    detail::matmul(cache.fc1_out.data(), model.fc2_w.data(), cache.logits.data(), nn,
                   static_cast<std::size_t>(cfg.dense_units),
                   static_cast<std::size_t>(cfg.num_classes), false);
    for (std::size_t s = 0; s < nn; ++s) {
        T* row = cache.logits.data() + s * cfg.num_classes;
        for (int j = 0; j < cfg.num_classes; ++j) row[j] += model.fc2_b.v[static_cast<std::size_t>(j)];
    }

    detail::softmax_rows(cache.logits.data(), cache.probs.data(), nn,
                         static_cast<std::size_t>(cfg.num_classes));
}

// Parameter gradients, same shapes and order as Model::parameters().
template <class T>
struct Gradients {
    Tensor<T> conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b;

    static Gradients like(const Model<T>& m) {
        Gradients g;
        auto ps = m.parameters();
        Tensor<T>* gs[] = {&g.conv1_w, &g.conv1_b, &g.conv2_w, &g.conv2_b,
                           &g.fc1_w,   &g.fc1_b,   &g.fc2_w,   &g.fc2_b};
        for (int i = 0; i < 8; ++i) {
            gs[i]->shape = ps[static_cast<std::size_t>(i)]->shape;
            gs[i]->v.assign(ps[static_cast<std::size_t>(i)]->v.size(), T(0));
        }
        return g;
    }

    std::vector<Tensor<T>*> list() {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
    }
};

// Mean softmax cross-entropy over the batch in the cache.
template <class T>
double batch_loss(const ForwardCache<T>& cache, const std::vector<int>& labels, int num_classes) {
    double loss = 0.0;
    for (std::size_t s = 0; s < static_cast<std::size_t>(cache.n); ++s) {
        const T* in = cache.logits.data() + s * static_cast<std::size_t>(num_classes);
        T mx = in[0];
        for (int c = 1; c < num_classes; ++c)
            if (in[c] > mx) mx = in[c];
        T sum = T(0);
        for (int c = 0; c < num_classes; ++c) sum += std::exp(in[c] - mx);
        const T logit = in[labels[s]];
        loss += -(static_cast<double>(logit - mx) - std::log(static_cast<double>(sum)));
    }
    return loss / static_cast<double>(cache.n);
}

// Backprop through the whole stack; fills `grads` with d(mean loss)/d(param).
template <class T>
void backward_batch(const Model<T>& model, const ForwardCache<T>& cache,
                    const std::vector<int>& labels, Gradients<T>& grads) {
    const ModelConfig& cfg = model.config;
    const LayerDims dims = compute_dims(cfg);
    const std::size_t nn = static_cast<std::size_t>(cache.n);
    const std::size_t classes = static_cast<std::size_t>(cfg.num_classes);
    const std::size_t dense = static_cast<std::size_t>(cfg.dense_units);
    const std::size_t flat = static_cast<std::size_t>(dims.flat);
    const std::size_t k1 = static_cast<std::size_t>(cfg.kernel) * cfg.kernel;
    const std::size_t p1 = static_cast<std::size_t>(dims.conv1_h) * dims.conv1_w;
    const std::size_t pool1_plane = static_cast<std::size_t>(dims.pool1_h) * dims.pool1_w;
    const std::size_t k2 = static_cast<std::size_t>(cfg.conv1_filters) * cfg.kernel * cfg.kernel;
    const std::size_t p2 = static_cast<std::size_t>(dims.conv2_h) * dims.conv2_w;

    // dLogits = (probs - onehot) / n
    std::vector<T> dlogits(cache.probs);
    for (std::size_t s = 0; s < nn; ++s)
        dlogits[s * classes + static_cast<std::size_t>(labels[s])] -= T(1);
    const T invn = T(1) / static_cast<T>(cache.n);
    for (auto& v : dlogits) v *= invn;

    // fc2: dW = fc1_out^T * dlogits, db = column sums, dfc1 = dlogits * W^T
    {
        std::vector<T> fc1_t(dense * nn);
        detail::transpose(cache.fc1_out.data(), fc1_t.data(), nn, dense);
        detail::matmul(fc1_t.data(), dlogits.data(), grads.fc2_w.data(), dense, nn, classes, false);
        for (std::size_t c = 0; c < classes; ++c) {
            T acc = T(0);
            for (std::size_t s = 0; s < nn; ++s) acc += dlogits[s * classes + c];
            grads.fc2_b.v[c] = acc;
        }
    }
    std::vector<T> dfc1(nn * dense);
    {
        std::vector<T> w2_t(classes * dense);
        detail::transpose(model.fc2_w.data(), w2_t.data(), dense, classes);
        detail::matmul(dlogits.data(), w2_t.data(), dfc1.data(), nn, classes, dense, false);
    }
    for (std::size_t i = 0; i < dfc1.size(); ++i)
        if (cache.fc1_out[i] <= T(0)) dfc1[i] = T(0);

    // fc1: dW = pool2_out^T * dfc1, dpool2 = dfc1 * W^T
    {
        std::vector<T> p2_t(flat * nn);
        detail::transpose(cache.pool2_out.data(), p2_t.data(), nn, flat);
        detail::matmul(p2_t.data(), dfc1.data(), grads.fc1_w.data(), flat, nn, dense, false);
        for (std::size_t j = 0; j < dense; ++j) {
            T acc = T(0);
            for (std::size_t s = 0; s < nn; ++s) acc += dfc1[s * dense + j];
            grads.fc1_b.v[j] = acc;
        }
    }
    std::vector<T> dpool2(nn * flat);
    {
        std::vector<T> w1_t(dense * flat);
        detail::transpose(model.fc1_w.data(), w1_t.data(), flat, dense);
        detail::matmul(dfc1.data(), w1_t.data(), dpool2.data(), nn, dense, flat, false);
    }

    // conv2 gradients, sample by sample in fixed order.
    std::vector<T> dconv2(nn * cfg.conv2_filters * p2, T(0));
    parallel_for(0, nn, [&](std::size_t s) {
        T* d2 = dconv2.data() + s * cfg.conv2_filters * p2;
        detail::maxpool_backward(dpool2.data() + s * flat,
                                 cache.pool2_idx.data() + s * cfg.conv2_filters *
                                     (static_cast<std::size_t>(dims.pool2_h) * dims.pool2_w),
                                 cfg.conv2_filters, dims.conv2_h, dims.conv2_w, cfg.pool, d2);
        const T* act = cache.conv2_out.data() + s * cfg.conv2_filters * p2;
        for (std::size_t i = 0; i < cfg.conv2_filters * p2; ++i)
            if (act[i] <= T(0)) d2[i] = T(0);
    });
    {
        std::vector<T> cols_t(p2 * k2);
        for (std::size_t s = 0; s < nn; ++s) {
            const T* d2 = dconv2.data() + s * cfg.conv2_filters * p2;
            detail::transpose(cache.cols2.data() + s * k2 * p2, cols_t.data(), k2, p2);
            detail::matmul(d2, cols_t.data(), grads.conv2_w.data(),
                           static_cast<std::size_t>(cfg.conv2_filters), p2, k2, true);
            for (int c = 0; c < cfg.conv2_filters; ++c) {
                T acc = T(0);
                const T* plane = d2 + static_cast<std::size_t>(c) * p2;
                for (std::size_t i = 0; i < p2; ++i) acc += plane[i];
                grads.conv2_b.v[static_cast<std::size_t>(c)] += acc;
            }
        }
    }

    // Push conv2 gradient to pool1, then through pool1 and conv1 ReLU.
    std::vector<T> dconv1(nn * cfg.conv1_filters * p1, T(0));
    {
        std::vector<T> w2c_t(k2 * cfg.conv2_filters);
        detail::transpose(model.conv2_w.data(), w2c_t.data(),
                          static_cast<std::size_t>(cfg.conv2_filters), k2);
        std::vector<T> dcols2(k2 * p2);
        std::vector<T> dpool1(cfg.conv1_filters * pool1_plane);
        for (std::size_t s = 0; s < nn; ++s) {
            detail::matmul(w2c_t.data(), dconv2.data() + s * cfg.conv2_filters * p2, dcols2.data(),
                           k2, static_cast<std::size_t>(cfg.conv2_filters), p2, false);
            std::fill(dpool1.begin(), dpool1.end(), T(0));
            detail::col2im_add(dcols2.data(), cfg.conv1_filters, dims.pool1_h, dims.pool1_w,
                               cfg.kernel, dpool1.data());
            T* d1 = dconv1.data() + s * cfg.conv1_filters * p1;
            detail::maxpool_backward(dpool1.data(),
                                     cache.pool1_idx.data() + s * cfg.conv1_filters * pool1_plane,
                                     cfg.conv1_filters, dims.conv1_h, dims.conv1_w, cfg.pool, d1);
            const T* act = cache.conv1_out.data() + s * cfg.conv1_filters * p1;
            for (std::size_t i = 0; i < cfg.conv1_filters * p1; ++i)
                if (act[i] <= T(0)) d1[i] = T(0);
        }
    }

    // conv1 weight/bias gradients (input gradient is never needed).
    {
        std::vector<T> cols_t(p1 * k1);
        for (std::size_t s = 0; s < nn; ++s) {
            const T* d1 = dconv1.data() + s * cfg.conv1_filters * p1;
            detail::transpose(cache.cols1.data() + s * k1 * p1, cols_t.data(), k1, p1);
            detail::matmul(d1, cols_t.data(), grads.conv1_w.data(),
                           static_cast<std::size_t>(cfg.conv1_filters), p1, k1, true);
            for (int c = 0; c < cfg.conv1_filters; ++c) {
                T acc = T(0);
                const T* plane = d1 + static_cast<std::size_t>(c) * p1;
                for (std::size_t i = 0; i < p1; ++i) acc += plane[i];
                grads.conv1_b.v[static_cast<std::size_t>(c)] += acc;
            }
        }
    }
}

// Forward pass returning one PredictionVector per image plane.
template <class T>
std::vector<PredictionVector> forward_probs(const Model<T>& model, const T* images, int n) {
    ForwardCache<T> cache;
    forward_batch(model, images, n, cache);
    std::vector<PredictionVector> out(static_cast<std::size_t>(n));
    const std::size_t classes = static_cast<std::size_t>(model.config.num_classes);
    for (std::size_t s = 0; s < static_cast<std::size_t>(n); ++s) {
        out[s].probabilities.resize(classes);
        for (std::size_t c = 0; c < classes; ++c)
            out[s].probabilities[c] = static_cast<double>(cache.probs[s * classes + c]);
    }
    return out;
}

// Single-image forward pass.
template <class T>
PredictionVector predict(const Model<T>& model, const GrayImage& image) {
    if (image.width != model.config.input_w || image.height != model.config.input_h)
        throw ShapeMismatch("predict: image is " + std::to_string(image.width) + "x" +
                            std::to_string(image.height) + " but model expects " +
                            std::to_string(model.config.input_w) + "x" +
                            std::to_string(model.config.input_h));
    std::vector<T> plane(image.pixels.size());
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = static_cast<T>(image.pixels[i]);
    return forward_probs(model, plane.data(), 1).front();
}

// Batched prediction over many images. Per-image outputs are bit-identical
// for any batch size.
template <class T>
std::vector<PredictionVector> predict_batch(const Model<T>& model,
                                            const std::vector<GrayImage>& images, int batch) {
    if (batch < 1) throw InvalidArgument("predict_batch: batch must be >= 1");
    const std::size_t plane = static_cast<std::size_t>(model.config.input_h) * model.config.input_w;
    std::vector<PredictionVector> out;
    out.reserve(images.size());
    std::vector<T> buf;
    for (std::size_t at = 0; at < images.size(); at += static_cast<std::size_t>(batch)) {
        const int n = static_cast<int>(std::min<std::size_t>(batch, images.size() - at));
        buf.assign(static_cast<std::size_t>(n) * plane, T(0));
        for (int s = 0; s < n; ++s) {
            const GrayImage& img = images[at + static_cast<std::size_t>(s)];
            if (img.width != model.config.input_w || img.height != model.config.input_h)
                throw ShapeMismatch("predict_batch: image dimensions do not match the model");
            for (std::size_t i = 0; i < plane; ++i)
                buf[static_cast<std::size_t>(s) * plane + i] = static_cast<T>(img.pixels[i]);
        }
        auto part = forward_probs(model, buf.data(), n);
        for (auto& p : part) out.push_back(std::move(p));
    }
    return out;
}

} // namespace bankread

#endif // BANKREAD_NET_HPP
