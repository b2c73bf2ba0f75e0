#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "owd/common.hpp"
#include "owd/dataset.hpp"
#include "owd/demod_cnn.hpp"  // Demodulated
#include "owd/neural_core.hpp"

namespace owd {

// One resampled 1-NN classifier: K frame indices into the training set
// plus its error odds beta; the vote coefficient is ln(1/beta).
struct WeakLearner {
    std::vector<std::uint32_t> subset;
    double beta = 0.0;
};

struct AdaBoostModel {
    LabeledDataset training_set;  // the saved set the subsets index into
    std::vector<WeakLearner> learners;

    int n_classes() const { return training_set.scheme.alphabet_size; }
};

// Label of the L2-nearest subset frame; distance ties go to the earliest
// subset position. The partial-sum early exit cannot change the result:
// it only skips candidates already strictly worse.
inline int knn_classify(const LabeledDataset& ds,
                        std::span<const std::uint32_t> subset,
                        std::span<const double> query) {
    if (subset.empty()) throw Error("empty weak-learner subset");
    double best = std::numeric_limits<double>::infinity();
    int best_label = 0;
    for (std::uint32_t idx : subset) {
        const auto& frame = ds.frames[idx];
        if (frame.samples.size() != query.size())
            throw Error("frame length mismatch in nearest-neighbor scan");
        double acc = 0.0;
        for (std::size_t i = 0; i < query.size(); ++i) {
            double d = frame.samples[i] - query[i];
            acc += d * d;
            if (acc > best) break;
        }
        if (acc < best) {
            best = acc;
            best_label = frame.label;
        }
    }
    return best_label;
}

// e_q = sum_i d_i * (1 - I(G_q(y_i), z_i))
inline double weighted_error(std::span<const int> predictions,
                             const LabeledDataset& ds,
                             std::span<const double> weights) {
    if (predictions.size() != ds.frames.size() ||
        weights.size() != ds.frames.size())
        throw Error("prediction/weight size mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (predictions[i] != ds.frames[i].label) e += weights[i];
    return e;
}

// Misclassified samples scale by 1/beta, then the vector renormalizes to
// sum 1.
inline std::vector<double> reweight(std::span<const double> weights,
                                    std::span<const int> predictions,
                                    const LabeledDataset& ds, double beta) {
    if (beta <= 0.0) throw Error("beta must be positive");
    std::vector<double> next(weights.begin(), weights.end());
    for (std::size_t i = 0; i < next.size(); ++i)
        if (predictions[i] != ds.frames[i].label) next[i] /= beta;
    double total = 0.0;
    for (double w : next) total += w;
    for (auto& w : next) w /= total;
    return next;
}

namespace detail {

inline std::vector<std::uint32_t> resample_by_weight(
    std::span<const double> weights, Rng& rng) {
    std::vector<double> cdf(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        cdf[i] = acc;
    }
    std::vector<std::uint32_t> subset(weights.size());
    for (auto& idx : subset) {
        double u = rng.uniform01() * acc;
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        idx = static_cast<std::uint32_t>(it - cdf.begin());
    }
    return subset;
}

}  // namespace detail

inline constexpr double adaboost_beta_min = 1e-10;
inline constexpr int adaboost_max_retries = 10;

// Boosting loop: initial weights 1/K; each round resamples K frames with
// replacement by the current weights, fits a 1-NN learner, and scores it
// on the full training set. e == 0 clamps beta to the floor and stops
// early; e >= 0.5 discards the learner and redraws, giving up on the
// round after the retry budget and keeping what was accepted so far.
inline AdaBoostModel train_adaboost(const LabeledDataset& train_set, int q_rounds,
                                    std::uint64_t seed) {
    if (train_set.k() < 2) throw Error("adaboost needs at least two frames");
    if (q_rounds < 1) throw Error("q must be >= 1");

    const std::size_t k = train_set.frames.size();
    AdaBoostModel model;
    model.training_set = train_set;

    std::vector<double> weights(k, 1.0 / static_cast<double>(k));
    Rng rng(derive_seed(seed, 0xb005));
    std::vector<int> predictions(k);

    for (int q = 0; q < q_rounds; ++q) {
        bool accepted = false;
        for (int attempt = 0; attempt <= adaboost_max_retries; ++attempt) {
            auto subset = detail::resample_by_weight(weights, rng);
            parallel_for(k, [&](std::size_t i) {
                predictions[i] = knn_classify(model.training_set, subset,
                                              train_set.frames[i].samples);
            });
            double e = weighted_error(predictions, train_set, weights);
            if (e == 0.0) {
                model.learners.push_back({std::move(subset), adaboost_beta_min});
                return model;  // perfect learner dominates; stop early
            }
            if (e >= 0.5) continue;
            double beta = e / (1.0 - e);
            weights = reweight(weights, predictions, train_set, beta);
            model.learners.push_back({std::move(subset), beta});
            accepted = true;
            break;
        }
        if (!accepted) break;  // retry budget exhausted; keep learners so far
    }
    if (model.learners.empty())
        throw Error("adaboost training failed: no usable weak learner");
    return model;
}

// Weighted vote of Eq.-21 form: each learner adds ln(1/beta) to its
// predicted class; highest total wins, ties to the smallest class.
inline Demodulated classify(const AdaBoostModel& model,
                            const WaveformFrame& frame) {
    if (model.learners.empty()) throw Error("empty ensemble");
    std::vector<double> votes(static_cast<std::size_t>(model.n_classes()), 0.0);
    for (const auto& learner : model.learners) {
        int pred = knn_classify(model.training_set, learner.subset, frame.samples);
        votes[static_cast<std::size_t>(pred - 1)] += std::log(1.0 / learner.beta);
    }
    int label = 1 + argmax_index(votes);
    return {label, label};
}

}  // namespace owd
