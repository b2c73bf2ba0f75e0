#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "owd/baseline_mld.hpp"

using namespace owd;

namespace {

LabeledDataset toy_set(const std::vector<std::vector<double>>& frames,
                       const std::vector<int>& labels,
                       Scheme kind = Scheme::ook) {
    LabeledDataset ds;
    ds.scheme = ModulationScheme::of(kind);
    ds.n = int(frames.front().size());
    for (std::size_t i = 0; i < frames.size(); ++i)
        ds.frames.push_back({frames[i], labels[i]});
    return ds;
}

// independent 2-D Gaussian log-density via the explicit inverse
double logpdf2(const std::vector<double>& x, const std::vector<double>& mu,
               double s00, double s01, double s11) {
    double det = s00 * s11 - s01 * s01;
    double dx = x[0] - mu[0], dy = x[1] - mu[1];
    double quad = (s11 * dx * dx - 2 * s01 * dx * dy + s00 * dy * dy) / det;
    return -0.5 * (quad + std::log(det) + 2 * std::log(2 * M_PI));
}

}  // namespace

TEST_CASE("fit computes the class mean") {
    auto ds = toy_set({{0, 0}, {2, 2}, {5, 5}, {7, 7}}, {1, 1, 2, 2});
    auto params = fit_mld(ds);
    CHECK(params.classes[0].mean == std::vector<double>{1.0, 1.0});
    CHECK(params.classes[1].mean == std::vector<double>{6.0, 6.0});
}

TEST_CASE("duplicated samples hit the regularization floor") {
    auto ds = toy_set({{3, 3}, {3, 3}, {9, 1}, {9, 1}}, {1, 1, 2, 2});
    auto params = fit_mld(ds);
    for (const auto& cls : params.classes) {
        CHECK(cls.cov(0, 0) == 1e-6);
        CHECK(cls.cov(1, 1) == 1e-6);
        CHECK(cls.cov(0, 1) == 0.0);
        CHECK(std::isfinite(cls.log_det));
    }
}

TEST_CASE("fit matches direct moment formulas") {
    Rng rng(5);
    std::vector<std::vector<double>> frames;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        frames.push_back(
            {rng.normal(), 0.5 * rng.normal() + 1.0, 2.0 * rng.normal()});
        labels.push_back(1 + i % 2);
    }
    auto ds = toy_set(frames, labels);
    auto params = fit_mld(ds);

    for (int cls = 1; cls <= 2; ++cls) {
        std::vector<std::vector<double>> members;
        for (std::size_t i = 0; i < frames.size(); ++i)
            if (labels[i] == cls) members.push_back(frames[i]);
        std::vector<double> mean(3, 0.0);
        for (const auto& m : members)
            for (int j = 0; j < 3; ++j) mean[std::size_t(j)] += m[std::size_t(j)];
        for (auto& v : mean) v /= double(members.size());

        const auto& fitted = params.classes[std::size_t(cls - 1)];
        for (int j = 0; j < 3; ++j)
            CHECK(fitted.mean[std::size_t(j)] ==
                  Catch::Approx(mean[std::size_t(j)]).margin(1e-12));

        double trace = 0.0;
        for (int p = 0; p < 3; ++p) {
            for (int q = 0; q < 3; ++q) {
                double cov = 0.0;
                for (const auto& m : members)
                    cov += (m[std::size_t(p)] - mean[std::size_t(p)]) *
                           (m[std::size_t(q)] - mean[std::size_t(q)]);
                cov /= double(members.size() - 1);
                if (p == q) trace += cov;
                if (p != q)
                    CHECK(fitted.cov(p, q) == Catch::Approx(cov).margin(1e-12));
            }
        }
        double lambda = 1e-6 * trace / 3.0;
        for (int p = 0; p < 3; ++p) {
            double cov = 0.0;
            for (const auto& m : members)
                cov += (m[std::size_t(p)] - mean[std::size_t(p)]) *
                       (m[std::size_t(p)] - mean[std::size_t(p)]);
            cov /= double(members.size() - 1);
            CHECK(fitted.cov(p, p) == Catch::Approx(cov + lambda).margin(1e-12));
        }
    }
}

TEST_CASE("classify picks the matching mean under a shared covariance") {
    MldParams params;
    params.scheme_kind = Scheme::qpsk;
    params.n = 2;
    params.n_classes = 4;
    for (int z = 0; z < 4; ++z) {
        MldClass cls;
        cls.mean = {double(z), double(2 * z)};
        cls.cov = Mat(2, 2);
        cls.cov(0, 0) = cls.cov(1, 1) = 0.3;
        cls.cov(0, 1) = cls.cov(1, 0) = 0.05;
        mld_finalize_class(cls);
        params.classes.push_back(std::move(cls));
    }
    for (int z = 0; z < 4; ++z) {
        WaveformFrame f{{double(z), double(2 * z)}, 1};
        CHECK(classify(params, f).label == z + 1);
    }
}

TEST_CASE("midpoint between two equal-covariance classes ties to class 1") {
    MldParams params;
    params.scheme_kind = Scheme::ook;
    params.n = 2;
    params.n_classes = 2;
    for (int z = 0; z < 2; ++z) {
        MldClass cls;
        cls.mean = {z == 0 ? 0.0 : 2.0, z == 0 ? 0.0 : 2.0};
        cls.cov = Mat(2, 2);
        cls.cov(0, 0) = cls.cov(1, 1) = 1.0;
        mld_finalize_class(cls);
        params.classes.push_back(std::move(cls));
    }
    WaveformFrame mid{{1.0, 1.0}, 1};
    CHECK(classify(params, mid).label == 1);
}

TEST_CASE("decisions match a direct density evaluation on a 2-D grid") {
    Rng rng(9);
    std::vector<std::vector<double>> frames;
    std::vector<int> labels;
    const double centers[3][2] = {{0.0, 0.0}, {2.5, 0.5}, {1.0, 3.0}};
    for (int i = 0; i < 90; ++i) {
        int cls = i % 3;
        frames.push_back({centers[cls][0] + 0.6 * rng.normal(),
                          centers[cls][1] + 0.4 * rng.normal()});
        labels.push_back(cls + 1);
    }
    auto ds = toy_set(frames, labels, Scheme::qpsk);
    // qpsk has four classes; add a fourth cluster
    for (int i = 0; i < 30; ++i) {
        frames.push_back({-2.0 + 0.3 * rng.normal(), 2.0 + 0.3 * rng.normal()});
        labels.push_back(4);
    }
    ds = toy_set(frames, labels, Scheme::qpsk);
    auto params = fit_mld(ds);

    for (double x = -3.0; x <= 4.0; x += 0.7) {
        for (double y = -2.0; y <= 4.0; y += 0.7) {
            WaveformFrame f{{x, y}, 1};
            int got = classify(params, f).label;
            double best = -1e300;
            int want = 0;
            for (int z = 0; z < 4; ++z) {
                const auto& cls = params.classes[std::size_t(z)];
                double lp = logpdf2(f.samples, cls.mean, cls.cov(0, 0),
                                    cls.cov(0, 1), cls.cov(1, 1));
                if (lp > best) {
                    best = lp;
                    want = z + 1;
                }
            }
            CHECK(got == want);
        }
    }
}

TEST_CASE("argmax of log densities is shift-invariant") {
    auto ds = toy_set({{0, 0}, {0.5, 0}, {4, 4}, {4.5, 4}}, {1, 1, 2, 2});
    auto params = fit_mld(ds);
    WaveformFrame f{{3.0, 3.4}, 1};
    std::vector<double> scores;
    for (const auto& cls : params.classes)
        scores.push_back(mld_log_density(cls, f.samples));
    auto shifted = scores;
    for (auto& s : shifted) s += 123.456;
    CHECK(argmax_index(scores) == argmax_index(shifted));
}

TEST_CASE("log densities stay finite on degenerate training data") {
    auto ds = toy_set({{1, 1, 1, 1}, {1, 1, 1, 1}, {2, 2, 2, 2}, {2, 2, 2, 2}},
                      {1, 1, 2, 2});
    auto params = fit_mld(ds);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        WaveformFrame f{{rng.uniform(-5, 5), rng.uniform(-5, 5),
                         rng.uniform(-5, 5), rng.uniform(-5, 5)},
                        1};
        for (const auto& cls : params.classes)
            CHECK(std::isfinite(mld_log_density(cls, f.samples)));
    }
}

TEST_CASE("fit requires two samples per class") {
    auto ds = toy_set({{0, 0}, {1, 1}, {5, 5}}, {1, 1, 2});
    CHECK_THROWS_AS(fit_mld(ds), Error);
}

TEST_CASE("classify validates the frame length") {
    auto ds = toy_set({{0, 0}, {1, 1}, {5, 5}, {6, 6}}, {1, 1, 2, 2});
    auto params = fit_mld(ds);
    WaveformFrame bad{{0.0, 0.0, 0.0}, 1};
    CHECK_THROWS_AS(classify(params, bad), Error);
}
