#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "owd/common.hpp"
#include "owd/dataset.hpp"
#include "owd/demod_cnn.hpp"  // Demodulated
#include "owd/neural_core.hpp"

namespace owd {

// Bernoulli-Bernoulli RBM; visible inputs may be real-valued in [0,1],
// used directly as probabilities.
struct Rbm {
    Mat w;                  // hidden x visible
    std::vector<double> a;  // visible bias
    std::vector<double> b;  // hidden bias

    int visible_units() const { return w.cols; }
    int hidden_units() const { return w.rows; }

    static Rbm make(int visible, int hidden, Rng& rng) {
        Rbm r;
        r.w = Mat(hidden, visible);
        for (auto& v : r.w.a) v = init_weight(rng, visible);
        r.a.assign(static_cast<std::size_t>(visible), 0.0);
        r.b.assign(static_cast<std::size_t>(hidden), 0.0);
        return r;
    }
};

// p(h_j = 1 | v) = sigmoid(b_j + sum_i w_ji v_i)
inline std::vector<double> hidden_conditional(const Rbm& rbm,
                                              std::span<const double> v) {
    if (static_cast<int>(v.size()) != rbm.visible_units())
        throw Error("visible vector length mismatch");
    std::vector<double> p(rbm.b.begin(), rbm.b.end());
    for (int j = 0; j < rbm.hidden_units(); ++j) {
        const double* wr = &rbm.w.a[static_cast<std::size_t>(j) * rbm.w.cols];
        double acc = p[static_cast<std::size_t>(j)];
        for (int i = 0; i < rbm.visible_units(); ++i)
            acc += wr[i] * v[static_cast<std::size_t>(i)];
        p[static_cast<std::size_t>(j)] = sigmoid(acc);
    }
    return p;
}

// p(v_i = 1 | h) = sigmoid(a_i + sum_j h_j w_ji)
inline std::vector<double> visible_conditional(const Rbm& rbm,
                                               std::span<const double> h) {
    if (static_cast<int>(h.size()) != rbm.hidden_units())
        throw Error("hidden vector length mismatch");
    std::vector<double> p(rbm.a.begin(), rbm.a.end());
    for (int j = 0; j < rbm.hidden_units(); ++j) {
        double hj = h[static_cast<std::size_t>(j)];
        if (hj == 0.0) continue;
        const double* wr = &rbm.w.a[static_cast<std::size_t>(j) * rbm.w.cols];
        for (int i = 0; i < rbm.visible_units(); ++i)
            p[static_cast<std::size_t>(i)] += hj * wr[i];
    }
    for (auto& v : p) v = sigmoid(v);
    return p;
}

// One step of contrastive divergence on a mini-batch:
//   h_hat ~ p(h|v), v_hat ~ p(v|h_hat),
//   dW_ji = mean[ p(h_j|v) v_i - p(h_j|v_hat) v_hat_i ],
//   da_i  = mean[ v_i - v_hat_i ],
//   db_j  = mean[ p(h_j|v) - p(h_j|v_hat) ],
// then theta += eps * dtheta. Sampling uses a per-sample derived stream,
// so the result does not depend on batch processing order.
inline void cd1_update(Rbm& rbm,
                       std::span<const std::vector<double>> batch,
                       double eps, Rng& rng) {
    if (batch.empty()) return;
    if (eps < 0.0) throw Error("learning rate must be >= 0");
    const int m = rbm.visible_units();
    const int n = rbm.hidden_units();

    Mat dw(n, m);
    std::vector<double> da(static_cast<std::size_t>(m), 0.0);
    std::vector<double> db(static_cast<std::size_t>(n), 0.0);
    std::uint64_t batch_seed = rng.next_u64();

    std::vector<double> h_hat(static_cast<std::size_t>(n));
    std::vector<double> v_hat(static_cast<std::size_t>(m));
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto& v = batch[s];
        Rng srng(derive_seed(batch_seed, s));
        auto ph = hidden_conditional(rbm, v);
        for (int j = 0; j < n; ++j)
            h_hat[static_cast<std::size_t>(j)] =
                srng.bernoulli(ph[static_cast<std::size_t>(j)]) ? 1.0 : 0.0;
        auto pv = visible_conditional(rbm, h_hat);
        for (int i = 0; i < m; ++i)
            v_hat[static_cast<std::size_t>(i)] =
                srng.bernoulli(pv[static_cast<std::size_t>(i)]) ? 1.0 : 0.0;
        auto ph_hat = hidden_conditional(rbm, v_hat);

        for (int j = 0; j < n; ++j) {
            double* dwr = &dw.a[static_cast<std::size_t>(j) * m];
            double pj = ph[static_cast<std::size_t>(j)];
            double qj = ph_hat[static_cast<std::size_t>(j)];
            for (int i = 0; i < m; ++i)
                dwr[i] += pj * v[static_cast<std::size_t>(i)] -
                          qj * v_hat[static_cast<std::size_t>(i)];
            db[static_cast<std::size_t>(j)] += pj - qj;
        }
        for (int i = 0; i < m; ++i)
            da[static_cast<std::size_t>(i)] +=
                v[static_cast<std::size_t>(i)] - v_hat[static_cast<std::size_t>(i)];
    }

    double scale = eps / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < rbm.w.a.size(); ++i)
        rbm.w.a[i] += scale * dw.a[i];
    for (std::size_t i = 0; i < rbm.a.size(); ++i) rbm.a[i] += scale * da[i];
    for (std::size_t i = 0; i < rbm.b.size(); ++i) rbm.b[i] += scale * db[i];
}

struct DbnParams {
    Scheme scheme_kind = Scheme::ook;
    int n = 0;
    int n_classes = 0;
    Rbm rbm1, rbm2, rbm3;
    DenseLayer out;

    std::array<int, 3> hidden_sizes() const {
        return {rbm1.hidden_units(), rbm2.hidden_units(), rbm3.hidden_units()};
    }
};

// Per-scheme hidden sizes; the low-order and 256-QAM entries are the
// documented endpoints, mid-order QAM interpolates between them.
inline std::array<int, 3> default_hidden_sizes(Scheme kind) {
    switch (kind) {
        case Scheme::ook:
        case Scheme::qpsk:
        case Scheme::ppm4:
            return {10, 10, 20};
        case Scheme::qam256:
            return {500, 500, 2000};
        default:
            return {100, 100, 400};
    }
}

inline DbnParams make_dbn(Scheme scheme, int n, std::array<int, 3> hidden,
                          int n_classes, std::uint64_t seed) {
    for (int h : hidden)
        if (h < 1) throw Error("hidden layer sizes must be positive");
    DbnParams p;
    p.scheme_kind = scheme;
    p.n = n;
    p.n_classes = n_classes;
    Rng rng(seed);
    p.rbm1 = Rbm::make(n, hidden[0], rng);
    p.rbm2 = Rbm::make(hidden[0], hidden[1], rng);
    p.rbm3 = Rbm::make(hidden[1], hidden[2], rng);
    p.out = DenseLayer(n_classes, hidden[2]);
    p.out.init(rng);
    return p;
}

// Greedy layer-wise CD-1: each trained RBM's mean-field hidden
// probabilities become the next RBM's data.
inline void pretrain(DbnParams& dbn, const std::vector<std::vector<double>>& data,
                     int epochs, double eps, int batch_size,
                     std::uint64_t seed) {
    if (batch_size < 1) throw Error("batch_size must be >= 1");
    if (epochs < 0) throw Error("epochs must be >= 0");
    Rbm* stack[3] = {&dbn.rbm1, &dbn.rbm2, &dbn.rbm3};

    std::vector<std::vector<double>> layer_data = data;
    Rng rng(derive_seed(seed, 0xdb9));
    for (int level = 0; level < 3; ++level) {
        Rbm& rbm = *stack[level];
        std::vector<std::size_t> order(layer_data.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (int epoch = 0; epoch < epochs; ++epoch) {
            rng.shuffle(order);
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(batch_size)) {
                std::size_t stop = std::min(
                    order.size(), start + static_cast<std::size_t>(batch_size));
                std::vector<std::vector<double>> batch;
                batch.reserve(stop - start);
                for (std::size_t i = start; i < stop; ++i)
                    batch.push_back(layer_data[order[i]]);
                cd1_update(rbm, batch, eps, rng);
            }
        }
        if (level < 2) {
            std::vector<std::vector<double>> next(layer_data.size());
            parallel_for(layer_data.size(), [&](std::size_t i) {
                next[i] = hidden_conditional(rbm, layer_data[i]);
            });
            layer_data = std::move(next);
        }
    }
}

// Feed-forward view used by fine-tuning and classification: the three RBM
// up-passes plus the supervised output layer. Visible biases play no role
// in the feed-forward direction.
inline Mlp dbn_as_mlp(const DbnParams& dbn) {
    Mlp net;
    net.layers.resize(4);
    net.layers[0].w = dbn.rbm1.w;
    net.layers[0].b = dbn.rbm1.b;
    net.layers[1].w = dbn.rbm2.w;
    net.layers[1].b = dbn.rbm2.b;
    net.layers[2].w = dbn.rbm3.w;
    net.layers[2].b = dbn.rbm3.b;
    net.layers[3].w = dbn.out.w;
    net.layers[3].b = dbn.out.b;
    return net;
}

inline void dbn_from_mlp(DbnParams& dbn, const Mlp& net) {
    dbn.rbm1.w = net.layers[0].w;
    dbn.rbm1.b = net.layers[0].b;
    dbn.rbm2.w = net.layers[1].w;
    dbn.rbm2.b = net.layers[1].b;
    dbn.rbm3.w = net.layers[2].w;
    dbn.rbm3.b = net.layers[2].b;
    dbn.out.w = net.layers[3].w;
    dbn.out.b = net.layers[3].b;
}

// Supervised backpropagation over all feed-forward weights and biases.
inline std::vector<double> finetune(DbnParams& dbn,
                                    const LabeledDataset& train_set,
                                    const SgdConfig& sgd) {
    if (train_set.scheme.kind != dbn.scheme_kind)
        throw Error("dataset scheme does not match the model");
    if (train_set.n != dbn.n)
        throw Error("frame length does not match the model");
    std::vector<std::vector<double>> xs(train_set.frames.size());
    std::vector<std::vector<double>> ts(train_set.frames.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = train_set.frames[i].samples;
        ts[i] = one_hot(train_set.frames[i].label, dbn.n_classes);
    }
    Mlp net = dbn_as_mlp(dbn);
    auto history = train_mlp(net, xs, ts, sgd);
    dbn_from_mlp(dbn, net);
    return history;
}

struct DbnTrainConfig {
    std::array<int, 3> hidden = {0, 0, 0};  // zeros mean the per-scheme default
    int pretrain_epochs = 100;
    double pretrain_rate = 0.1;
    SgdConfig bp;  // fine-tune settings
};

// Pretrain + fine-tune from a labeled dataset.
inline DbnParams train_dbn(const LabeledDataset& train_set,
                           const DbnTrainConfig& cfg, std::uint64_t seed) {
    auto hidden = cfg.hidden;
    if (hidden[0] == 0) hidden = default_hidden_sizes(train_set.scheme.kind);
    DbnParams dbn = make_dbn(train_set.scheme.kind, train_set.n, hidden,
                             train_set.scheme.alphabet_size,
                             derive_seed(seed, 0xdb1));
    std::vector<std::vector<double>> data(train_set.frames.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = train_set.frames[i].samples;
    pretrain(dbn, data, cfg.pretrain_epochs, cfg.pretrain_rate,
             cfg.bp.batch_size, derive_seed(seed, 0xdb2));
    SgdConfig bp = cfg.bp;
    bp.seed = derive_seed(seed, 0xdb3);
    finetune(dbn, train_set, bp);
    return dbn;
}

inline Demodulated classify(const DbnParams& dbn, const WaveformFrame& frame) {
    if (frame.n() != dbn.n)
        throw Error("frame length does not match the trained model");
    auto scores = dbn_as_mlp(dbn).forward(frame.samples);
    int label = 1 + argmax_index(scores);
    return {label, label};
}

}  // namespace owd
