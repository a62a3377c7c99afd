// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_TRAIN_HPP
#define BANKREAD_TRAIN_HPP

#include <chrono>
#include <functional>

#include "bankread/dataset.hpp"
#include "bankread/net.hpp"

namespace bankread {

struct EpochStats {
    double loss = 0.0;
    double accuracy = 0.0;
    double wall_s = 0.0;
};

// One entry per completed epoch. Loss/accuracy come from the pre-update
// forward pass of each minibatch, aggregated over the epoch.
struct TrainHistory {
    std::vector<EpochStats> epochs;
};

struct EvalMetrics {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

namespace detail {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-7;

template <class T>
struct AdamState {
    std::vector<std::vector<T>> m, v;
    long step = 0;

    static AdamState like(Model<T>& model) {
        AdamState st;
        for (auto* p : model.parameters()) {
            st.m.emplace_back(p->v.size(), T(0));
            st.v.emplace_back(p->v.size(), T(0));
        }
        return st;
    }
};

template <class T>
void apply_update(Model<T>& model, Gradients<T>& grads, AdamState<T>& adam) {
    const ModelConfig& cfg = model.config;
    auto params = model.parameters();
    auto gs = grads.list();
    if (cfg.optimizer == OptimizerKind::sgd) {
        const T lr = static_cast<T>(cfg.learning_rate);
        for (std::size_t i = 0; i < params.size(); ++i) {
            T* w = params[i]->data();
            const T* g = gs[i]->data();
            for (std::size_t j = 0; j < params[i]->v.size(); ++j) w[j] -= lr * g[j];
        }
        return;
    }
    adam.step += 1;
    const double b1t = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
    const double b2t = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));
    const T lr = static_cast<T>(cfg.learning_rate);
    const T beta1 = static_cast<T>(kAdamBeta1);
    const T beta2 = static_cast<T>(kAdamBeta2);
    const T eps = static_cast<T>(kAdamEps);
    const T inv_b1t = static_cast<T>(1.0 / b1t);
    const T inv_b2t = static_cast<T>(1.0 / b2t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        T* w = params[i]->data();
        const T* g = gs[i]->data();
        T* m = adam.m[i].data();
        T* v = adam.v[i].data();
        for (std::size_t j = 0; j < params[i]->v.size(); ++j) {
            m[j] = beta1 * m[j] + (T(1) - beta1) * g[j];
            v[j] = beta2 * v[j] + (T(1) - beta2) * g[j] * g[j];
            const T mhat = m[j] * inv_b1t;
            const T vhat = v[j] * inv_b2t;
            w[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

// Copies dataset images [from,to) into a contiguous batch buffer.
template <class T>
void fill_batch(const Dataset& ds, std::size_t from, std::size_t to, std::vector<T>& images,
                std::vector<int>& labels) {
    const std::size_t plane = static_cast<std::size_t>(ds.image_width()) * ds.image_height();
    images.resize((to - from) * plane);
    labels.resize(to - from);
    for (std::size_t s = from; s < to; ++s) {
        const auto& sample = ds.samples[s];
        labels[s - from] = sample.label;
        T* dst = images.data() + (s - from) * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] = static_cast<T>(sample.image.pixels[i]);
    }
}

template <class T>
void check_dataset_compat(const Model<T>& model, const Dataset& ds, const char* who) {
    if (ds.samples.empty())
        throw InvalidArgument(std::string(who) + ": dataset is empty");
    if (ds.image_width() != model.config.input_w || ds.image_height() != model.config.input_h)
        throw ShapeMismatch(std::string(who) + ": dataset images are " +
                            std::to_string(ds.image_width()) + "x" +
                            std::to_string(ds.image_height()) + " but model expects " +
                            std::to_string(model.config.input_w) + "x" +
                            std::to_string(model.config.input_h));
    for (const auto& s : ds.samples)
        if (s.label < 0 || s.label >= model.config.num_classes)
            throw InvalidArgument(std::string(who) + ": label " + std::to_string(s.label) +
                                  " out of range for " + std::to_string(model.config.num_classes) +
                                  " classes");
}

} // namespace detail

// Minibatch gradient descent with softmax cross-entropy. The dataset is
// consumed in its stored order every epoch (replicate already shuffled it),
// so the result is a pure function of (model, dataset). Non-finite loss or
// parameters abort with the offending step named.
template <class T>
TrainHistory train(Model<T>& model, const Dataset& train_set) {
    detail::check_dataset_compat(model, train_set, "train");
    TrainHistory history;
    if (model.config.epochs == 0) return history;

    auto adam = detail::AdamState<T>::like(model);
    ForwardCache<T> cache;
    auto grads = Gradients<T>::like(model);
    std::vector<T> images;
    std::vector<int> labels;
    const std::size_t n = train_set.samples.size();
    const std::size_t bs = static_cast<std::size_t>(model.config.batch_size);
    long step = 0;

    for (int epoch = 0; epoch < model.config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t at = 0; at < n; at += bs) {
            const std::size_t hi = std::min(n, at + bs);
            detail::fill_batch(train_set, at, hi, images, labels);
            forward_batch(model, images.data(), static_cast<int>(hi - at), cache);

            const std::size_t classes = static_cast<std::size_t>(model.config.num_classes);
            for (std::size_t s = 0; s < hi - at; ++s) {
                const T* row = cache.probs.data() + s * classes;
                std::size_t best = 0;
                for (std::size_t c = 1; c < classes; ++c)
                    if (row[c] > row[best]) best = c;
                if (static_cast<int>(best) == labels[s]) ++correct;
            }
            const double loss = batch_loss(cache, labels, model.config.num_classes);
            loss_sum += loss * static_cast<double>(hi - at);

            for (auto* g : grads.list()) std::fill(g->v.begin(), g->v.end(), T(0));
            backward_batch(model, cache, labels, grads);
            detail::apply_update(model, grads, adam);
            ++step;

            if (!std::isfinite(loss))
                throw DivergenceError("training diverged at step " + std::to_string(step) +
                                      " (epoch " + std::to_string(epoch + 1) +
                                      "): non-finite loss");
            for (auto* p : model.parameters())
                if (!all_finite(*p))
                    throw DivergenceError("training diverged at step " + std::to_string(step) +
                                          " (epoch " + std::to_string(epoch + 1) +
                                          "): non-finite parameter");
        }
        const auto t1 = std::chrono::steady_clock::now();
        EpochStats stats;
        stats.loss = loss_sum / static_cast<double>(n);
        stats.accuracy = static_cast<double>(correct) / static_cast<double>(n);
        stats.wall_s = std::chrono::duration<double>(t1 - t0).count();
        history.epochs.push_back(stats);
    }
    model.trained = true;
    return history;
}

// Accuracy (argmax == label) and mean cross-entropy over a dataset.
template <class T>
EvalMetrics evaluate(const Model<T>& model, const Dataset& test_set) {
    detail::check_dataset_compat(model, test_set, "evaluate");
    ForwardCache<T> cache;
    std::vector<T> images;
    std::vector<int> labels;
    const std::size_t n = test_set.samples.size();
    const std::size_t bs = static_cast<std::size_t>(model.config.batch_size);
    const std::size_t classes = static_cast<std::size_t>(model.config.num_classes);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t at = 0; at < n; at += bs) {
        const std::size_t hi = std::min(n, at + bs);
        detail::fill_batch(test_set, at, hi, images, labels);
        forward_batch(model, images.data(), static_cast<int>(hi - at), cache);
        for (std::size_t s = 0; s < hi - at; ++s) {
            const T* row = cache.probs.data() + s * classes;
            std::size_t best = 0;
            for (std::size_t c = 1; c < classes; ++c)
                if (row[c] > row[best]) best = c;
            if (static_cast<int>(best) == labels[s]) ++correct;
        }
        loss_sum += batch_loss(cache, labels, model.config.num_classes) *
                    static_cast<double>(hi - at);
    }
    EvalMetrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    m.mean_loss = loss_sum / static_cast<double>(n);
    return m;
}

namespace detail {

// Shared by gradient_check and its harness self-test; `tamper` may corrupt
// the analytic gradients to prove the comparison has teeth.
inline double gradient_check_impl(
    const ModelConfig& config, std::uint64_t seed,
    const std::function<void(std::vector<Tensor<double>*>&)>& tamper) {
    const int batch = 4;
    auto model = init_model<double>(config, seed);
    const std::size_t plane = static_cast<std::size_t>(config.input_h) * config.input_w;

    SplitMix64 rng(derive_seed(seed, 101));
    std::vector<double> images(static_cast<std::size_t>(batch) * plane);
    for (auto& p : images) p = rng.next_unit();
    std::vector<int> labels(batch);
    for (auto& l : labels)
        l = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(config.num_classes)));

    ForwardCache<double> cache;
    forward_batch(model, images.data(), batch, cache);
    auto grads = Gradients<double>::like(model);
    backward_batch(model, cache, labels, grads);
    auto glist = grads.list();
    if (tamper) tamper(glist);

    const double h = 1e-4;
    double max_rel = 0.0;
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        for (std::size_t j = 0; j < params[i]->v.size(); ++j) {
            const double saved = params[i]->v[j];
            params[i]->v[j] = saved + h;
            forward_batch(model, images.data(), batch, cache);
            const double lp = batch_loss(cache, labels, config.num_classes);
            params[i]->v[j] = saved - h;
            forward_batch(model, images.data(), batch, cache);
            const double lm = batch_loss(cache, labels, config.num_classes);
            params[i]->v[j] = saved;
            const double gn = (lp - lm) / (2.0 * h);
            const double ga = glist[i]->v[j];
            const double rel = std::fabs(ga - gn) / std::max({std::fabs(ga), std::fabs(gn), 1e-8});
            if (rel > max_rel) max_rel = rel;
        }
    }
    return max_rel;
}

} // namespace detail

// Compares analytic gradients against central finite differences (h=1e-4)
// for every parameter on a random batch; returns the worst relative error.
// Meant for tiny configs where the full scan is affordable.
inline double gradient_check(const ModelConfig& config, std::uint64_t seed) {
    return detail::gradient_check_impl(config, seed, nullptr);
}

} // namespace bankread

#endif // BANKREAD_TRAIN_HPP
