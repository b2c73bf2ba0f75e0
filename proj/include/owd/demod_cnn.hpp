#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "owd/common.hpp"
#include "owd/dataset.hpp"
#include "owd/neural_core.hpp"
#include "owd/rasterizer.hpp"

namespace owd {

struct Demodulated {
    int label = 0;   // class index in {1..M}
    int symbol = 0;  // transmitted symbol index; identical alphabet
};

// Fixed topology: 28x28 -> 6 @ 5x5 conv -> 2x2 pool -> 12 @ 3x3 conv over
// all six maps -> 2x2 pool -> dense 300 -> M, sigmoid everywhere.
struct CnnParams {
    static constexpr int conv1_maps = 6;
    static constexpr int conv1_kernel = 5;
    static constexpr int conv2_maps = 12;
    static constexpr int conv2_kernel = 3;
    static constexpr int fc_inputs = conv2_maps * 5 * 5;  // 300

    Scheme scheme_kind = Scheme::ook;
    int n = 0;  // frame length the model expects
    int n_classes = 0;

    std::array<Mat, conv1_maps> k1{};
    std::array<double, conv1_maps> b1{};
    std::array<std::array<Mat, conv1_maps>, conv2_maps> k2{};
    std::array<double, conv2_maps> b2{};
    DenseLayer fc;

    static CnnParams make(Scheme scheme, int n, int n_classes,
                          std::uint64_t seed) {
        CnnParams p;
        p.scheme_kind = scheme;
        p.n = n;
        p.n_classes = n_classes;
        Rng rng(seed);
        for (auto& k : p.k1) {
            k = Mat(conv1_kernel, conv1_kernel);
            for (auto& v : k.a) v = init_weight(rng, conv1_kernel * conv1_kernel);
        }
        p.b1.fill(0.0);
        for (auto& row : p.k2)
            for (auto& k : row) {
                k = Mat(conv2_kernel, conv2_kernel);
                for (auto& v : k.a)
                    v = init_weight(rng,
                                    conv1_maps * conv2_kernel * conv2_kernel);
            }
        p.b2.fill(0.0);
        p.fc = DenseLayer(n_classes, fc_inputs);
        p.fc.init(rng);
        return p;
    }

    std::size_t parameter_count() const {
        std::size_t c1 = conv1_maps * (conv1_kernel * conv1_kernel + 1);
        std::size_t c2 =
            conv2_maps * (conv1_maps * conv2_kernel * conv2_kernel + 1);
        std::size_t fc_n =
            static_cast<std::size_t>(fc_inputs) * n_classes + n_classes;
        return c1 + c2 + fc_n;
    }
};

inline Mat image_to_mat(const BinaryImage& img) {
    Mat m(BinaryImage::side, BinaryImage::side);
    for (std::size_t i = 0; i < img.px.size(); ++i)
        m.a[i] = static_cast<double>(img.px[i]);
    return m;
}

// Intermediate activations kept for backpropagation.
struct CnnTrace {
    std::array<Mat, CnnParams::conv1_maps> y1;        // 24x24
    std::array<PoolResult, CnnParams::conv1_maps> p1;  // 12x12
    std::array<Mat, CnnParams::conv2_maps> y2;        // 10x10
    std::array<PoolResult, CnnParams::conv2_maps> p2;  // 5x5
    std::vector<double> flat;                          // 300
    std::vector<double> scores;                        // M
};

inline void cnn_forward_trace(const CnnParams& p, const Mat& x,
                              CnnTrace& trace) {
    for (int i = 0; i < CnnParams::conv1_maps; ++i) {
        trace.y1[static_cast<std::size_t>(i)] =
            conv2d_valid(x, p.k1[static_cast<std::size_t>(i)],
                         p.b1[static_cast<std::size_t>(i)]);
        trace.p1[static_cast<std::size_t>(i)] =
            maxpool2(trace.y1[static_cast<std::size_t>(i)]);
    }
    for (int j = 0; j < CnnParams::conv2_maps; ++j) {
        Mat acc(10, 10);
        for (int i = 0; i < CnnParams::conv1_maps; ++i)
            xcorr_valid_add(trace.p1[static_cast<std::size_t>(i)].out,
                            p.k2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)],
                            acc);
        double bias = p.b2[static_cast<std::size_t>(j)];
        for (auto& v : acc.a) v = sigmoid(bias + v);
        trace.y2[static_cast<std::size_t>(j)] = std::move(acc);
        trace.p2[static_cast<std::size_t>(j)] =
            maxpool2(trace.y2[static_cast<std::size_t>(j)]);
    }
    trace.flat.resize(CnnParams::fc_inputs);
    for (int j = 0; j < CnnParams::conv2_maps; ++j) {
        const auto& pooled = trace.p2[static_cast<std::size_t>(j)].out;
        for (std::size_t i = 0; i < pooled.a.size(); ++i)
            trace.flat[static_cast<std::size_t>(j) * 25 + i] = pooled.a[i];
    }
    trace.scores = p.fc.forward(trace.flat);
}

// Score vector y3 (one sigmoid score per class).
inline std::vector<double> cnn_forward(const CnnParams& p,
                                       const BinaryImage& image) {
    CnnTrace trace;
    cnn_forward_trace(p, image_to_mat(image), trace);
    return trace.scores;
}

struct CnnGrads {
    std::array<Mat, CnnParams::conv1_maps> dk1;
    std::array<double, CnnParams::conv1_maps> db1{};
    std::array<std::array<Mat, CnnParams::conv1_maps>, CnnParams::conv2_maps> dk2;
    std::array<double, CnnParams::conv2_maps> db2{};
    DenseGrads dfc;

    void match(const CnnParams& p) {
        for (auto& m : dk1) m = Mat(CnnParams::conv1_kernel, CnnParams::conv1_kernel);
        for (auto& row : dk2)
            for (auto& m : row) m = Mat(CnnParams::conv2_kernel, CnnParams::conv2_kernel);
        dfc.match(p.fc);
    }
    void zero() {
        for (auto& m : dk1) m.fill(0.0);
        db1.fill(0.0);
        for (auto& row : dk2)
            for (auto& m : row) m.fill(0.0);
        db2.fill(0.0);
        dfc.zero();
    }
};

// Accumulates d(sample loss)/d(params) for one sample into grads.
inline void cnn_backward(const CnnParams& p, const Mat& x,
                         const CnnTrace& trace,
                         std::span<const double> target, CnnGrads& grads) {
    const auto& y = trace.scores;
    std::vector<double> d3(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        d3[i] = (y[i] - target[i]) * sigmoid_deriv_from_output(y[i]);

    std::vector<double> dflat(trace.flat.size(), 0.0);
    for (int r = 0; r < p.fc.w.rows; ++r) {
        double d = d3[static_cast<std::size_t>(r)];
        grads.dfc.db[static_cast<std::size_t>(r)] += d;
        double* gw = &grads.dfc.dw.a[static_cast<std::size_t>(r) * p.fc.w.cols];
        const double* wr = &p.fc.w.a[static_cast<std::size_t>(r) * p.fc.w.cols];
        for (int c = 0; c < p.fc.w.cols; ++c) {
            gw[c] += d * trace.flat[static_cast<std::size_t>(c)];
            dflat[static_cast<std::size_t>(c)] += d * wr[c];
        }
    }

    std::array<Mat, CnnParams::conv1_maps> dz1;
    for (auto& m : dz1) m = Mat(12, 12);

    for (int j = 0; j < CnnParams::conv2_maps; ++j) {
        Mat dp2(5, 5);
        for (std::size_t i = 0; i < dp2.a.size(); ++i)
            dp2.a[i] = dflat[static_cast<std::size_t>(j) * 25 + i];
        const auto& y2 = trace.y2[static_cast<std::size_t>(j)];
        Mat da2(10, 10);
        maxpool2_backward(dp2, trace.p2[static_cast<std::size_t>(j)], da2);
        for (std::size_t i = 0; i < da2.a.size(); ++i)
            da2.a[i] *= sigmoid_deriv_from_output(y2.a[i]);

        double db = 0.0;
        for (double v : da2.a) db += v;
        grads.db2[static_cast<std::size_t>(j)] += db;

        for (int i = 0; i < CnnParams::conv1_maps; ++i) {
            xcorr_valid_add(trace.p1[static_cast<std::size_t>(i)].out, da2,
                            grads.dk2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
            conv_full_add(da2,
                          p.k2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)],
                          dz1[static_cast<std::size_t>(i)]);
        }
    }

    for (int i = 0; i < CnnParams::conv1_maps; ++i) {
        const auto& y1 = trace.y1[static_cast<std::size_t>(i)];
        Mat da1(24, 24);
        maxpool2_backward(dz1[static_cast<std::size_t>(i)],
                          trace.p1[static_cast<std::size_t>(i)], da1);
        for (std::size_t k = 0; k < da1.a.size(); ++k)
            da1.a[k] *= sigmoid_deriv_from_output(y1.a[k]);

        double db = 0.0;
        for (double v : da1.a) db += v;
        grads.db1[static_cast<std::size_t>(i)] += db;
        xcorr_valid_add(x, da1, grads.dk1[static_cast<std::size_t>(i)]);
    }
}

inline void cnn_apply_update(CnnParams& p, const CnnGrads& g, double step) {
    for (int i = 0; i < CnnParams::conv1_maps; ++i) {
        for (std::size_t k = 0; k < p.k1[static_cast<std::size_t>(i)].a.size(); ++k)
            p.k1[static_cast<std::size_t>(i)].a[k] -=
                step * g.dk1[static_cast<std::size_t>(i)].a[k];
        p.b1[static_cast<std::size_t>(i)] -= step * g.db1[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < CnnParams::conv2_maps; ++j) {
        for (int i = 0; i < CnnParams::conv1_maps; ++i) {
            auto& kj = p.k2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            const auto& gj = g.dk2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < kj.a.size(); ++k) kj.a[k] -= step * gj.a[k];
        }
        p.b2[static_cast<std::size_t>(j)] -= step * g.db2[static_cast<std::size_t>(j)];
    }
    for (std::size_t k = 0; k < p.fc.w.a.size(); ++k)
        p.fc.w.a[k] -= step * g.dfc.dw.a[k];
    for (std::size_t k = 0; k < p.fc.b.size(); ++k)
        p.fc.b[k] -= step * g.dfc.db[k];
}

inline std::vector<Mat> cnn_prepare_images(const LabeledDataset& ds) {
    std::vector<Mat> images(ds.frames.size());
    parallel_for(ds.frames.size(), [&](std::size_t i) {
        images[i] = image_to_mat(visualize(ds.frames[i]));
    });
    return images;
}

// Mini-batch SGD on MSE over the visualized frames. Per-sample gradients
// within a batch run in parallel but reduce in sample order (bit-identical
// to a sequential pass). epoch_loss, when given, receives the full-set
// loss after each epoch.
inline CnnParams train_cnn(const LabeledDataset& train_set,
                           const SgdConfig& sgd,
                           std::vector<double>* epoch_loss = nullptr) {
    if (train_set.k() < sgd.batch_size)
        throw Error("training set smaller than one batch");
    const int m = train_set.scheme.alphabet_size;
    CnnParams params = CnnParams::make(train_set.scheme.kind, train_set.n, m,
                                       derive_seed(sgd.seed, 0xc99));

    auto images = cnn_prepare_images(train_set);
    std::vector<std::vector<double>> targets(images.size());
    for (std::size_t i = 0; i < images.size(); ++i)
        targets[i] = one_hot(train_set.frames[i].label, m);

    Rng rng(derive_seed(sgd.seed, 0xc9902));
    std::vector<std::size_t> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    constexpr std::size_t chunk = 16;
    std::array<CnnGrads, chunk> slot;
    std::array<CnnTrace, chunk> trace;
    for (auto& s : slot) s.match(params);
    CnnGrads batch_grads;
    batch_grads.match(params);

    for (int epoch = 0; epoch < sgd.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(sgd.batch_size)) {
            std::size_t stop = std::min(
                order.size(), start + static_cast<std::size_t>(sgd.batch_size));
            batch_grads.zero();
            for (std::size_t cs = start; cs < stop; cs += chunk) {
                std::size_t ce = std::min(stop, cs + chunk);
                parallel_for(
                    ce - cs,
                    [&](std::size_t r) {
                        std::size_t i = order[cs + r];
                        slot[r].zero();
                        cnn_forward_trace(params, images[i], trace[r]);
                        cnn_backward(params, images[i], trace[r], targets[i],
                                     slot[r]);
                    },
                    2);
                for (std::size_t r = 0; r < ce - cs; ++r) {
                    const auto& s = slot[r];
                    for (int i = 0; i < CnnParams::conv1_maps; ++i) {
                        for (std::size_t k = 0; k < s.dk1[static_cast<std::size_t>(i)].a.size(); ++k)
                            batch_grads.dk1[static_cast<std::size_t>(i)].a[k] +=
                                s.dk1[static_cast<std::size_t>(i)].a[k];
                        batch_grads.db1[static_cast<std::size_t>(i)] +=
                            s.db1[static_cast<std::size_t>(i)];
                    }
                    for (int j = 0; j < CnnParams::conv2_maps; ++j) {
                        for (int i = 0; i < CnnParams::conv1_maps; ++i) {
                            auto& acc = batch_grads.dk2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
                            const auto& src = s.dk2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
                            for (std::size_t k = 0; k < acc.a.size(); ++k)
                                acc.a[k] += src.a[k];
                        }
                        batch_grads.db2[static_cast<std::size_t>(j)] +=
                            s.db2[static_cast<std::size_t>(j)];
                    }
                    for (std::size_t k = 0; k < batch_grads.dfc.dw.a.size(); ++k)
                        batch_grads.dfc.dw.a[k] += s.dfc.dw.a[k];
                    for (std::size_t k = 0; k < batch_grads.dfc.db.size(); ++k)
                        batch_grads.dfc.db[k] += s.dfc.db[k];
                }
            }
            cnn_apply_update(params, batch_grads,
                             sgd.learning_rate / static_cast<double>(stop - start));
        }
        if (epoch_loss) {
            std::vector<double> losses(images.size());
            parallel_for(
                images.size(),
                [&](std::size_t i) {
                    CnnTrace t;
                    cnn_forward_trace(params, images[i], t);
                    losses[i] = mse_loss(t.scores, targets[i]);
                },
                64);
            double total = 0.0;
            for (double l : losses) total += l;
            epoch_loss->push_back(total / static_cast<double>(images.size()));
        }
    }
    return params;
}

inline Demodulated classify(const CnnParams& params, const WaveformFrame& frame) {
    if (frame.n() != params.n)
        throw Error("frame length does not match the trained model");
    auto scores = cnn_forward(params, visualize(frame));
    int label = 1 + argmax_index(scores);
    return {label, label};
}

// Objective adapter for finite-difference checks of the whole network on
// one (image, target). Parameter order matches the gradient flattening:
// k1, b1, k2, b2, fc weights, fc bias.
struct CnnObjective {
    CnnParams& params;
    Mat x;
    std::vector<double> t;

    std::vector<double*> parameters() {
        std::vector<double*> p;
        for (auto& k : params.k1)
            for (auto& v : k.a) p.push_back(&v);
        for (auto& v : params.b1) p.push_back(&v);
        for (auto& row : params.k2)
            for (auto& k : row)
                for (auto& v : k.a) p.push_back(&v);
        for (auto& v : params.b2) p.push_back(&v);
        for (auto& v : params.fc.w.a) p.push_back(&v);
        for (auto& v : params.fc.b) p.push_back(&v);
        return p;
    }
    double loss() const {
        CnnTrace trace;
        cnn_forward_trace(params, x, trace);
        return mse_loss(trace.scores, t);
    }
    std::vector<double> gradient() const {
        CnnGrads g;
        g.match(params);
        g.zero();
        CnnTrace trace;
        cnn_forward_trace(params, x, trace);
        cnn_backward(params, x, trace, t, g);
        std::vector<double> flat;
        for (const auto& k : g.dk1) flat.insert(flat.end(), k.a.begin(), k.a.end());
        flat.insert(flat.end(), g.db1.begin(), g.db1.end());
        for (const auto& row : g.dk2)
            for (const auto& k : row)
                flat.insert(flat.end(), k.a.begin(), k.a.end());
        flat.insert(flat.end(), g.db2.begin(), g.db2.end());
        flat.insert(flat.end(), g.dfc.dw.a.begin(), g.dfc.dw.a.end());
        flat.insert(flat.end(), g.dfc.db.begin(), g.dfc.db.end());
        return flat;
    }
};

}  // namespace owd
