#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "owd/common.hpp"

namespace owd {

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

    double& operator()(int r, int c) {
        return a[static_cast<std::size_t>(r) * cols + c];
    }
    double operator()(int r, int c) const {
        return a[static_cast<std::size_t>(r) * cols + c];
    }
    void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

inline double sigmoid_deriv_from_output(double y) { return y * (1.0 - y); }

// Valid-mode cross-correlation (no kernel flip).
inline Mat xcorr_valid(const Mat& x, const Mat& k) {
    if (k.rows > x.rows || k.cols > x.cols)
        throw Error("kernel larger than input");
    Mat out(x.rows - k.rows + 1, x.cols - k.cols + 1);
    for (int p = 0; p < out.rows; ++p) {
        for (int q = 0; q < out.cols; ++q) {
            double acc = 0.0;
            for (int u = 0; u < k.rows; ++u) {
                const double* xr = &x.a[static_cast<std::size_t>(p + u) * x.cols + q];
                const double* kr = &k.a[static_cast<std::size_t>(u) * k.cols];
                for (int v = 0; v < k.cols; ++v) acc += xr[v] * kr[v];
            }
            out(p, q) = acc;
        }
    }
    return out;
}

// Accumulating form used in inner training loops.
inline void xcorr_valid_add(const Mat& x, const Mat& k, Mat& out) {
    for (int p = 0; p < out.rows; ++p) {
        for (int q = 0; q < out.cols; ++q) {
            double acc = 0.0;
            for (int u = 0; u < k.rows; ++u) {
                const double* xr = &x.a[static_cast<std::size_t>(p + u) * x.cols + q];
                const double* kr = &k.a[static_cast<std::size_t>(u) * k.cols];
                for (int v = 0; v < k.cols; ++v) acc += xr[v] * kr[v];
            }
            out(p, q) += acc;
        }
    }
}

// Full convolution: out(r,c) = sum_{u,v} d(u,v) k(r-u, c-v). This is the
// input-gradient counterpart of xcorr_valid.
inline void conv_full_add(const Mat& d, const Mat& k, Mat& out) {
    for (int u = 0; u < d.rows; ++u) {
        for (int v = 0; v < d.cols; ++v) {
            double dv = d(u, v);
            if (dv == 0.0) continue;
            for (int i = 0; i < k.rows; ++i) {
                double* orow = &out.a[static_cast<std::size_t>(u + i) * out.cols + v];
                const double* krow = &k.a[static_cast<std::size_t>(i) * k.cols];
                for (int j = 0; j < k.cols; ++j) orow[j] += dv * krow[j];
            }
        }
    }
}

// Y = sigmoid(bias + X (x) K), valid mode.
inline Mat conv2d_valid(const Mat& x, const Mat& k, double bias) {
    Mat out = xcorr_valid(x, k);
    for (auto& v : out.a) v = sigmoid(bias + v);
    return out;
}

struct PoolResult {
    Mat out;
    // Flat input index of each pooled maximum; ties resolve to the smallest
    // (row, col) of the 2x2 block.
    std::vector<int> argmax;
};

inline PoolResult maxpool2(const Mat& x) {
    if (x.rows % 2 != 0 || x.cols % 2 != 0)
        throw Error("maxpool2 requires even dimensions");
    PoolResult res;
    res.out = Mat(x.rows / 2, x.cols / 2);
    res.argmax.resize(static_cast<std::size_t>(res.out.rows) * res.out.cols);
    for (int r = 0; r < res.out.rows; ++r) {
        for (int c = 0; c < res.out.cols; ++c) {
            int base_r = 2 * r, base_c = 2 * c;
            double best = x(base_r, base_c);
            int best_idx = base_r * x.cols + base_c;
            const int cand[3][2] = {
                {base_r, base_c + 1}, {base_r + 1, base_c}, {base_r + 1, base_c + 1}};
            for (const auto& rc : cand) {
                double v = x(rc[0], rc[1]);
                if (v > best) {
                    best = v;
                    best_idx = rc[0] * x.cols + rc[1];
                }
            }
            res.out(r, c) = best;
            res.argmax[static_cast<std::size_t>(r) * res.out.cols + c] = best_idx;
        }
    }
    return res;
}

// Routes pooled-output gradients back to the recorded argmax positions.
inline void maxpool2_backward(const Mat& dout, const PoolResult& pool,
                              Mat& dinput) {
    for (int r = 0; r < dout.rows; ++r)
        for (int c = 0; c < dout.cols; ++c)
            dinput.a[static_cast<std::size_t>(
                pool.argmax[static_cast<std::size_t>(r) * dout.cols + c])] +=
                dout(r, c);
}

struct SgdConfig {
    double learning_rate = 0.1;
    int batch_size = 100;
    int epochs = 100;
    std::uint64_t seed = 0;
};

// Uniform [-0.5, 0.5] scaled by 1/sqrt(fan_in).
inline double init_weight(Rng& rng, int fan_in) {
    return rng.uniform(-0.5, 0.5) / std::sqrt(static_cast<double>(fan_in));
}

inline std::vector<double> one_hot(int label, int n_classes) {
    std::vector<double> t(static_cast<std::size_t>(n_classes), 0.0);
    t[static_cast<std::size_t>(label - 1)] = 1.0;
    return t;
}

// Smallest index wins ties.
inline int argmax_index(std::span<const double> v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)])
            best = i;
    return best;
}

// Per-sample loss used throughout: L = 1/2 sum_k (y_k - t_k)^2.
inline double mse_loss(std::span<const double> y, std::span<const double> t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = y[i] - t[i];
        acc += 0.5 * d * d;
    }
    return acc;
}

struct DenseLayer {
    Mat w;                  // out x in
    std::vector<double> b;  // out

    DenseLayer() = default;
    DenseLayer(int out, int in) : w(out, in), b(static_cast<std::size_t>(out)) {}

    void init(Rng& rng) {
        for (auto& v : w.a) v = init_weight(rng, w.cols);
        std::fill(b.begin(), b.end(), 0.0);
    }

    std::vector<double> forward(std::span<const double> x) const {
        std::vector<double> y(b.begin(), b.end());
        for (int r = 0; r < w.rows; ++r) {
            const double* wr = &w.a[static_cast<std::size_t>(r) * w.cols];
            double acc = y[static_cast<std::size_t>(r)];
            for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[static_cast<std::size_t>(c)];
            y[static_cast<std::size_t>(r)] = sigmoid(acc);
        }
        return y;
    }
};

struct DenseGrads {
    Mat dw;
    std::vector<double> db;

    void match(const DenseLayer& l) {
        if (dw.rows != l.w.rows || dw.cols != l.w.cols) {
            dw = Mat(l.w.rows, l.w.cols);
            db.assign(l.b.size(), 0.0);
        }
    }
    void zero() {
        dw.fill(0.0);
        std::fill(db.begin(), db.end(), 0.0);
    }
};

// Fully-connected sigmoid stack trained with mini-batch SGD on MSE.
struct Mlp {
    std::vector<DenseLayer> layers;

    static Mlp make(std::span<const int> sizes, std::uint64_t seed) {
        if (sizes.size() < 2) throw Error("mlp needs at least two layer sizes");
        Mlp net;
        Rng rng(seed);
        for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
            DenseLayer l(sizes[i + 1], sizes[i]);
            l.init(rng);
            net.layers.push_back(std::move(l));
        }
        return net;
    }

    int input_size() const { return layers.front().w.cols; }
    int output_size() const { return layers.back().w.rows; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.w.a.size() + l.b.size();
        return n;
    }

    // activations[0] is the input, activations[i+1] the output of layer i.
    std::vector<std::vector<double>> forward_trace(
        std::span<const double> x) const {
        std::vector<std::vector<double>> acts;
        acts.reserve(layers.size() + 1);
        acts.emplace_back(x.begin(), x.end());
        for (const auto& l : layers) acts.push_back(l.forward(acts.back()));
        return acts;
    }

    std::vector<double> forward(std::span<const double> x) const {
        std::vector<double> cur(x.begin(), x.end());
        for (const auto& l : layers) cur = l.forward(cur);
        return cur;
    }

    double sample_loss(std::span<const double> x,
                       std::span<const double> t) const {
        return mse_loss(forward(x), t);
    }

    void accumulate_gradients(const std::vector<std::vector<double>>& acts,
                              std::span<const double> target,
                              std::vector<DenseGrads>& grads) const {
        std::size_t depth = layers.size();
        const auto& y = acts[depth];
        std::vector<double> delta(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            delta[i] = (y[i] - target[i]) * sigmoid_deriv_from_output(y[i]);

        for (std::size_t li = depth; li-- > 0;) {
            const auto& l = layers[li];
            const auto& in = acts[li];
            auto& g = grads[li];
            for (int r = 0; r < l.w.rows; ++r) {
                double d = delta[static_cast<std::size_t>(r)];
                g.db[static_cast<std::size_t>(r)] += d;
                double* gw = &g.dw.a[static_cast<std::size_t>(r) * l.w.cols];
                for (int c = 0; c < l.w.cols; ++c)
                    gw[c] += d * in[static_cast<std::size_t>(c)];
            }
            if (li == 0) break;
            std::vector<double> prev(in.size(), 0.0);
            for (int r = 0; r < l.w.rows; ++r) {
                double d = delta[static_cast<std::size_t>(r)];
                const double* wr = &l.w.a[static_cast<std::size_t>(r) * l.w.cols];
                for (int c = 0; c < l.w.cols; ++c)
                    prev[static_cast<std::size_t>(c)] += d * wr[c];
            }
            for (std::size_t c = 0; c < prev.size(); ++c)
                prev[c] *= sigmoid_deriv_from_output(in[c]);
            delta = std::move(prev);
        }
    }

    void apply_update(const std::vector<DenseGrads>& grads, double step) {
        for (std::size_t li = 0; li < layers.size(); ++li) {
            auto& l = layers[li];
            const auto& g = grads[li];
            for (std::size_t i = 0; i < l.w.a.size(); ++i)
                l.w.a[i] -= step * g.dw.a[i];
            for (std::size_t i = 0; i < l.b.size(); ++i)
                l.b[i] -= step * g.db[i];
        }
    }

    std::vector<DenseGrads> make_grads() const {
        std::vector<DenseGrads> g(layers.size());
        for (std::size_t i = 0; i < layers.size(); ++i) g[i].match(layers[i]);
        return g;
    }
};

// Mean full-set loss, evaluated in parallel with a fixed reduction order.
inline double mlp_dataset_loss(const Mlp& net,
                               const std::vector<std::vector<double>>& xs,
                               const std::vector<std::vector<double>>& ts) {
    std::vector<double> losses(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        losses[i] = net.sample_loss(xs[i], ts[i]);
    });
    double acc = 0.0;
    for (double l : losses) acc += l;
    return acc / static_cast<double>(xs.size());
}

// Mini-batch SGD; returns the full-set loss after each epoch. Per-sample
// gradients inside a batch are computed in parallel but summed in sample
// order, so results match a sequential run bit for bit.
inline std::vector<double> train_mlp(Mlp& net,
                                     const std::vector<std::vector<double>>& xs,
                                     const std::vector<std::vector<double>>& ts,
                                     const SgdConfig& sgd) {
    if (xs.empty() || xs.size() != ts.size())
        throw Error("inconsistent training data");
    if (sgd.batch_size < 1) throw Error("batch_size must be >= 1");

    Rng rng(derive_seed(sgd.seed, 0x6d6c70));
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    // Threads only pay off once the per-sample pass is heavy enough.
    std::size_t grain =
        net.parameter_count() >= 50000 ? 2 : std::numeric_limits<std::size_t>::max();
    constexpr std::size_t chunk = 16;
    std::vector<std::vector<DenseGrads>> slot(chunk);
    for (auto& s : slot) s = net.make_grads();
    auto batch_grads = net.make_grads();

    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(sgd.epochs));
    for (int epoch = 0; epoch < sgd.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(sgd.batch_size)) {
            std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(sgd.batch_size));
            for (auto& g : batch_grads) g.zero();
            for (std::size_t cs = start; cs < stop; cs += chunk) {
                std::size_t ce = std::min(stop, cs + chunk);
                parallel_for(
                    ce - cs,
                    [&](std::size_t r) {
                        std::size_t i = order[cs + r];
                        for (auto& g : slot[r]) g.zero();
                        net.accumulate_gradients(net.forward_trace(xs[i]), ts[i],
                                                 slot[r]);
                    },
                    grain);
                for (std::size_t r = 0; r < ce - cs; ++r)
                    for (std::size_t li = 0; li < batch_grads.size(); ++li) {
                        for (std::size_t i = 0; i < batch_grads[li].dw.a.size(); ++i)
                            batch_grads[li].dw.a[i] += slot[r][li].dw.a[i];
                        for (std::size_t i = 0; i < batch_grads[li].db.size(); ++i)
                            batch_grads[li].db[i] += slot[r][li].db[i];
                    }
            }
            net.apply_update(batch_grads,
                             sgd.learning_rate / static_cast<double>(stop - start));
        }
        history.push_back(mlp_dataset_loss(net, xs, ts));
    }
    return history;
}

// Central finite differences against the model's analytic gradient.
// Model contract: parameters() yields pointers into live storage; loss()
// and gradient() evaluate the bound objective.
template <typename Model>
double backprop_check(Model& model, double eps) {
    if (!(eps >= 1e-6 && eps <= 1e-3))
        throw Error("finite-difference eps out of [1e-6, 1e-3]");
    auto params = model.parameters();
    auto analytic = model.gradient();
    if (analytic.size() != params.size())
        throw Error("gradient/parameter size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double saved = *params[i];
        *params[i] = saved + eps;
        double lp = model.loss();
        *params[i] = saved - eps;
        double lm = model.loss();
        *params[i] = saved;
        double numeric = (lp - lm) / (2.0 * eps);
        double denom =
            std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
    }
    return worst;
}

// Objective adapter for gradient-checking an Mlp on one (input, target).
struct MlpObjective {
    Mlp& net;
    std::vector<double> x;
    std::vector<double> t;

    std::vector<double*> parameters() {
        std::vector<double*> p;
        for (auto& l : net.layers) {
            for (auto& v : l.w.a) p.push_back(&v);
            for (auto& v : l.b) p.push_back(&v);
        }
        return p;
    }
    double loss() const { return net.sample_loss(x, t); }
    std::vector<double> gradient() const {
        auto grads = net.make_grads();
        net.accumulate_gradients(net.forward_trace(x), t, grads);
        std::vector<double> flat;
        for (const auto& g : grads) {
            flat.insert(flat.end(), g.dw.a.begin(), g.dw.a.end());
            flat.insert(flat.end(), g.db.begin(), g.db.end());
        }
        return flat;
    }
};

inline double backprop_check(Mlp& net, const std::vector<double>& x,
                             const std::vector<double>& t, double eps) {
    MlpObjective obj{net, x, t};
    return backprop_check(obj, eps);
}

}  // namespace owd
