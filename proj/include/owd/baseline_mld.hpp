#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "owd/common.hpp"
#include "owd/dataset.hpp"
#include "owd/demod_cnn.hpp"  // Demodulated
#include "owd/neural_core.hpp"

namespace owd {

namespace detail {

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
inline Mat cholesky(const Mat& m) {
    Mat l(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j <= i; ++j) {
            double acc = m(i, j);
            for (int k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            if (i == j) {
                if (acc <= 0.0)
                    throw Error("covariance not positive definite");
                l(i, j) = std::sqrt(acc);
            } else {
                l(i, j) = acc / l(j, j);
            }
        }
    }
    return l;
}

// Solves L y = x for lower-triangular L.
inline std::vector<double> forward_solve(const Mat& l,
                                         std::span<const double> x) {
    std::vector<double> y(x.size());
    for (int i = 0; i < l.rows; ++i) {
        double acc = x[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) acc -= l(i, k) * y[static_cast<std::size_t>(k)];
        y[static_cast<std::size_t>(i)] = acc / l(i, i);
    }
    return y;
}

}  // namespace detail

struct MldClass {
    std::vector<double> mean;
    Mat cov;   // regularized sample covariance
    Mat chol;  // its Cholesky factor
    double log_det = 0.0;
};

struct MldParams {
    Scheme scheme_kind = Scheme::ook;
    int n = 0;
    int n_classes = 0;
    std::vector<MldClass> classes;
};

inline void mld_finalize_class(MldClass& cls) {
    cls.chol = detail::cholesky(cls.cov);
    cls.log_det = 0.0;
    for (int i = 0; i < cls.chol.rows; ++i)
        cls.log_det += 2.0 * std::log(cls.chol(i, i));
}

// Per-class sample mean and covariance with a ridge at
// lambda = 1e-6 * trace/N (absolute floor when the covariance vanishes).
// Uniform class priors; the generator balances labels.
inline MldParams fit_mld(const LabeledDataset& train_set) {
    const int m = train_set.scheme.alphabet_size;
    const int n = train_set.n;
    MldParams params;
    params.scheme_kind = train_set.scheme.kind;
    params.n = n;
    params.n_classes = m;
    params.classes.resize(static_cast<std::size_t>(m));

    std::vector<std::vector<const WaveformFrame*>> by_class(
        static_cast<std::size_t>(m));
    for (const auto& f : train_set.frames)
        by_class[static_cast<std::size_t>(f.label - 1)].push_back(&f);

    for (int z = 0; z < m; ++z) {
        const auto& members = by_class[static_cast<std::size_t>(z)];
        if (members.size() < 2)
            throw Error("class " + std::to_string(z + 1) +
                        " has fewer than two samples");
        auto& cls = params.classes[static_cast<std::size_t>(z)];
        cls.mean.assign(static_cast<std::size_t>(n), 0.0);
        for (const auto* f : members)
            for (int i = 0; i < n; ++i)
                cls.mean[static_cast<std::size_t>(i)] += f->samples[static_cast<std::size_t>(i)];
        for (auto& v : cls.mean) v /= static_cast<double>(members.size());

        cls.cov = Mat(n, n);
        std::vector<double> centered(static_cast<std::size_t>(n));
        for (const auto* f : members) {
            for (int i = 0; i < n; ++i)
                centered[static_cast<std::size_t>(i)] =
                    f->samples[static_cast<std::size_t>(i)] -
                    cls.mean[static_cast<std::size_t>(i)];
            for (int i = 0; i < n; ++i) {
                double ci = centered[static_cast<std::size_t>(i)];
                double* row = &cls.cov.a[static_cast<std::size_t>(i) * n];
                for (int j = i; j < n; ++j)
                    row[j] += ci * centered[static_cast<std::size_t>(j)];
            }
        }
        double denom = static_cast<double>(members.size() - 1);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double v = cls.cov(i, j) / denom;
                cls.cov(i, j) = v;
                cls.cov(j, i) = v;
            }

        double trace = 0.0;
        for (int i = 0; i < n; ++i) trace += cls.cov(i, i);
        double lambda = trace > 0.0 ? 1e-6 * trace / n : 1e-6;
        for (int i = 0; i < n; ++i) cls.cov(i, i) += lambda;
        mld_finalize_class(cls);
    }
    return params;
}

inline double mld_log_density(const MldClass& cls,
                              std::span<const double> x) {
    std::vector<double> centered(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        centered[i] = x[i] - cls.mean[i];
    auto y = detail::forward_solve(cls.chol, centered);
    double quad = 0.0;
    for (double v : y) quad += v * v;
    double n = static_cast<double>(x.size());
    return -0.5 * (quad + cls.log_det + n * std::log(2.0 * M_PI));
}

// Maximum attribution probability; ties go to the smallest class index.
inline Demodulated classify(const MldParams& params, const WaveformFrame& frame) {
    if (frame.n() != params.n)
        throw Error("frame length does not match the fitted model");
    std::vector<double> scores(static_cast<std::size_t>(params.n_classes));
    for (int z = 0; z < params.n_classes; ++z)
        scores[static_cast<std::size_t>(z)] =
            mld_log_density(params.classes[static_cast<std::size_t>(z)],
                            frame.samples);
    int label = 1 + argmax_index(scores);
    return {label, label};
}

}  // namespace owd
