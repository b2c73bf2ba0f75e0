// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// anything fails. Heavier criteria train real models at desk scale, so a
// full run takes tens of minutes on a small CPU.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "owd/bench.hpp"
#include "owd/rasterizer.hpp"
#include "owd/serialize.hpp"

using namespace owd;

namespace {

struct Report {
    std::vector<std::string> notes;
    bool ok = true;

    void require(bool cond, const std::string& what) {
        if (!cond) ok = false;
        notes.push_back(std::string(cond ? "    ok   " : "    FAIL ") + what);
    }
    void note(const std::string& what) { notes.push_back("         " + what); }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// ------------------------------------------------------------------ 1
void criterion_shapes(Report& r) {
    auto params = CnnParams::make(Scheme::qam16, 40, 16, 1);
    Rng rng(2);
    Mat image(28, 28);
    for (auto& v : image.a) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
    CnnTrace trace;
    cnn_forward_trace(params, image, trace);
    bool shapes = true;
    for (const auto& m : trace.y1) shapes &= m.rows == 24 && m.cols == 24;
    for (const auto& p : trace.p1) shapes &= p.out.rows == 12 && p.out.cols == 12;
    for (const auto& m : trace.y2) shapes &= m.rows == 10 && m.cols == 10;
    for (const auto& p : trace.p2) shapes &= p.out.rows == 5 && p.out.cols == 5;
    r.require(shapes, "28x28 -> 6@24x24 -> 6@12x12 -> 12@10x10 -> 12@5x5");
    r.require(trace.flat.size() == 300, "flattened feature length 300");
    r.require(trace.scores.size() == 16, "output length equals |C|");
    r.require(params.parameter_count() ==
                  6 * 26 + 12 * (6 * 9 + 1) + (300 * 16 + 16),
              "parameter count matches the closed form");

    WaveformFrame f;
    for (int i = 0; i < 40; ++i)
        f.samples.push_back(0.5 + 0.4 * std::sin(2 * M_PI * 2 * i / 40.0));
    auto img = visualize(f);
    int two_valued = 1;
    for (auto p : img.px) two_valued &= (p == 0 || p == 1);
    r.require(two_valued == 1, "visualization emits a 28x28 binary image");
}

// ------------------------------------------------------------------ 2
void criterion_gradients(Report& r) {
    auto cnn = CnnParams::make(Scheme::ook, 40, 2, 31);
    Rng rng(33);
    CnnObjective obj{cnn, Mat(28, 28), {1.0, 0.0}};
    for (auto& v : obj.x.a) v = rng.bernoulli(0.35) ? 1.0 : 0.0;
    double cnn_err = backprop_check(obj, 1e-5);
    r.require(cnn_err < 1e-4, "CNN full-network gradient error " +
                                  fmt(cnn_err) + " < 1e-4");

    auto dbn = make_dbn(Scheme::qpsk, 12, {8, 6, 10}, 4, 19);
    auto net = dbn_as_mlp(dbn);
    std::vector<double> x(12), t = {0.0, 1.0, 0.0, 0.0};
    for (auto& v : x) v = rng.uniform01();
    double dbn_err = backprop_check(net, x, t, 1e-5);
    r.require(dbn_err < 1e-4, "DBN fine-tune path gradient error " +
                                  fmt(dbn_err) + " < 1e-4");
}

// ------------------------------------------------------------------ 3
double rbm_energy(const Rbm& rb, const std::vector<double>& v,
                  const std::vector<double>& h) {
    double e = 0.0;
    for (int i = 0; i < rb.visible_units(); ++i) e -= rb.a[std::size_t(i)] * v[std::size_t(i)];
    for (int j = 0; j < rb.hidden_units(); ++j) e -= rb.b[std::size_t(j)] * h[std::size_t(j)];
    for (int j = 0; j < rb.hidden_units(); ++j) {
        double acc = 0.0;
        for (int i = 0; i < rb.visible_units(); ++i)
            acc += rb.w(j, i) * v[std::size_t(i)];
        e -= h[std::size_t(j)] * acc;
    }
    return e;
}

void criterion_rbm_exactness(Report& r) {
    Rng meta(404);
    double worst = 0.0;
    for (int draw = 0; draw < 50; ++draw) {
        int m = 2 + int(meta.below(6));
        int n = 2 + int(meta.below(std::uint32_t(12 - m - 1)));
        Rng prng(1000 + std::uint64_t(draw));
        Rbm rb;
        rb.w = Mat(n, m);
        for (auto& v : rb.w.a) v = prng.normal();
        rb.a.resize(std::size_t(m));
        rb.b.resize(std::size_t(n));
        for (auto& v : rb.a) v = prng.normal();
        for (auto& v : rb.b) v = prng.normal();

        std::vector<double> v(std::size_t(m)), h(std::size_t(n));
        for (auto& x : v) x = meta.bernoulli(0.5) ? 1.0 : 0.0;
        for (auto& x : h) x = meta.bernoulli(0.5) ? 1.0 : 0.0;

        auto ph = hidden_conditional(rb, v);
        std::vector<double> numer(std::size_t(n), 0.0);
        double denom = 0.0;
        for (int bits = 0; bits < (1 << n); ++bits) {
            std::vector<double> hh(std::size_t(n));
            for (int j = 0; j < n; ++j) hh[std::size_t(j)] = (bits >> j) & 1;
            double w = std::exp(-rbm_energy(rb, v, hh));
            denom += w;
            for (int j = 0; j < n; ++j)
                if ((bits >> j) & 1) numer[std::size_t(j)] += w;
        }
        for (int j = 0; j < n; ++j)
            worst = std::max(worst,
                             std::abs(ph[std::size_t(j)] - numer[std::size_t(j)] / denom));

        auto pv = visible_conditional(rb, h);
        std::vector<double> vnum(std::size_t(m), 0.0);
        double vden = 0.0;
        for (int bits = 0; bits < (1 << m); ++bits) {
            std::vector<double> vv(std::size_t(m));
            for (int i = 0; i < m; ++i) vv[std::size_t(i)] = (bits >> i) & 1;
            double w = std::exp(-rbm_energy(rb, vv, h));
            vden += w;
            for (int i = 0; i < m; ++i)
                if ((bits >> i) & 1) vnum[std::size_t(i)] += w;
        }
        for (int i = 0; i < m; ++i)
            worst = std::max(worst,
                             std::abs(pv[std::size_t(i)] - vnum[std::size_t(i)] / vden));
    }
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "conditionals vs enumeration, max |err| = %.2e < 1e-10", worst);
    r.require(worst < 1e-10, msg);

    // exact-gradient ascent on the 4+3 RBM
    Rng prng(31337);
    Rbm rb;
    rb.w = Mat(3, 4);
    for (auto& v : rb.w.a) v = 0.1 * prng.normal();
    rb.a.assign(4, 0.0);
    rb.b.assign(3, 0.0);
    std::vector<std::vector<double>> batch = {
        {1, 0, 0, 1}, {1, 0, 0, 1}, {0, 1, 1, 0}, {0, 1, 1, 0},
        {1, 1, 0, 0}, {0, 0, 1, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}};

    auto loglik = [&](const Rbm& q) {
        double z = 0.0;
        for (int vb = 0; vb < 16; ++vb) {
            std::vector<double> vv(4);
            for (int i = 0; i < 4; ++i) vv[std::size_t(i)] = (vb >> i) & 1;
            for (int hb = 0; hb < 8; ++hb) {
                std::vector<double> hh(3);
                for (int j = 0; j < 3; ++j) hh[std::size_t(j)] = (hb >> j) & 1;
                z += std::exp(-rbm_energy(q, vv, hh));
            }
        }
        double total = 0.0;
        for (const auto& vv : batch) {
            double fs = 0.0;
            for (int hb = 0; hb < 8; ++hb) {
                std::vector<double> hh(3);
                for (int j = 0; j < 3; ++j) hh[std::size_t(j)] = (hb >> j) & 1;
                fs += std::exp(-rbm_energy(q, vv, hh));
            }
            total += std::log(fs) - std::log(z);
        }
        return total;
    };

    bool strictly_up = true;
    double prev = loglik(rb);
    for (int step = 0; step < 100; ++step) {
        Mat dw(3, 4);
        std::vector<double> da(4, 0.0), db(3, 0.0);
        for (const auto& vv : batch) {
            auto ph = hidden_conditional(rb, vv);
            for (int j = 0; j < 3; ++j) {
                for (int i = 0; i < 4; ++i) dw(j, i) += ph[std::size_t(j)] * vv[std::size_t(i)];
                db[std::size_t(j)] += ph[std::size_t(j)];
            }
            for (int i = 0; i < 4; ++i) da[std::size_t(i)] += vv[std::size_t(i)];
        }
        double z = 0.0;
        Mat evh(3, 4);
        std::vector<double> ev(4, 0.0), eh(3, 0.0);
        for (int vb = 0; vb < 16; ++vb) {
            std::vector<double> vv(4);
            for (int i = 0; i < 4; ++i) vv[std::size_t(i)] = (vb >> i) & 1;
            for (int hb = 0; hb < 8; ++hb) {
                std::vector<double> hh(3);
                for (int j = 0; j < 3; ++j) hh[std::size_t(j)] = (hb >> j) & 1;
                double w = std::exp(-rbm_energy(rb, vv, hh));
                z += w;
                for (int j = 0; j < 3; ++j)
                    for (int i = 0; i < 4; ++i)
                        evh(j, i) += w * hh[std::size_t(j)] * vv[std::size_t(i)];
                for (int i = 0; i < 4; ++i) ev[std::size_t(i)] += w * vv[std::size_t(i)];
                for (int j = 0; j < 3; ++j) eh[std::size_t(j)] += w * hh[std::size_t(j)];
            }
        }
        double b = double(batch.size());
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 4; ++i)
                rb.w(j, i) += 0.1 * (dw(j, i) / b - evh(j, i) / z);
        for (int i = 0; i < 4; ++i) rb.a[std::size_t(i)] += 0.1 * (da[std::size_t(i)] / b - ev[std::size_t(i)] / z);
        for (int j = 0; j < 3; ++j) rb.b[std::size_t(j)] += 0.1 * (db[std::size_t(j)] / b - eh[std::size_t(j)] / z);
        double cur = loglik(rb);
        strictly_up &= cur > prev;
        prev = cur;
    }
    r.require(strictly_up,
              "exact-gradient ascent strictly raises sum ln p(v) for 100 steps");
}

// ------------------------------------------------------------------ 4
void criterion_adaboost_algebra(Report& r) {
    LabeledDataset ds;
    ds.scheme = ModulationScheme::of(Scheme::ook);
    ds.n = 1;
    ds.frames = {{{0.0}, 1}, {{1.0}, 1}, {{2.0}, 2}, {{3.0}, 2}};
    std::vector<double> uniform(4, 0.25);

    std::vector<int> one_wrong = {1, 1, 2, 1};
    r.require(weighted_error(one_wrong, ds, uniform) == 0.25,
              "uniform weights, one of four wrong -> e = 0.25");

    std::vector<int> half_wrong = {1, 2, 2, 1};
    auto boundary = reweight(uniform, half_wrong, ds, 1.0);
    bool unchanged = true;
    for (double w : boundary) unchanged &= std::abs(w - 0.25) < 1e-12;
    r.require(unchanged, "beta = 1 boundary leaves weights unchanged");

    AdaBoostModel model;
    model.training_set = ds;
    model.training_set.frames = {{{0.0}, 1}, {{10.0}, 2}};
    model.learners.push_back({{0, 0}, 0.25});  // votes class 1 with ln 4
    model.learners.push_back({{1, 1}, 0.5});   // votes class 2 with ln 2
    WaveformFrame query{{5.0}, 1};
    r.require(classify(model, query).label == 1,
              "ln(4) beats ln(2) in the weighted vote");

    // seeded noisy toy: the ensemble's training error cannot exceed the
    // first learner's
    Rng rng(21);
    LabeledDataset noisy;
    noisy.scheme = ModulationScheme::of(Scheme::ook);
    noisy.n = 3;
    for (int i = 0; i < 60; ++i) {
        bool cls = i % 2 == 0;
        double cx = cls ? 0.2 : 0.8;
        int label = cls ? 1 : 2;
        if (rng.uniform01() < 0.10) label = 3 - label;
        noisy.frames.push_back({{cx + 0.04 * rng.normal(),
                                 cx + 0.04 * rng.normal(),
                                 cx + 0.04 * rng.normal()},
                                label});
    }
    auto ensemble = train_adaboost(noisy, 20, 23);
    double single_err = 0, vote_err = 0;
    for (const auto& f : noisy.frames) {
        single_err += knn_classify(ensemble.training_set,
                                   ensemble.learners[0].subset,
                                   f.samples) != f.label;
        vote_err += classify(ensemble, f).label != f.label;
    }
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "ensemble training error %.3f <= single learner %.3f",
                  vote_err / 60.0, single_err / 60.0);
    r.require(vote_err <= single_err, msg);
}

// ------------------------------------------------------------------ 5
void criterion_high_snr(Report& r) {
    SweepSpec spec;
    spec.demodulators = {Demod::cnn, Demod::dbn, Demod::adaboost, Demod::mld};
    spec.schemes = {Scheme::ook, Scheme::qpsk, Scheme::ppm4};
    spec.axis = "snr";
    spec.axis_values = {30.0};
    spec.n = 40;
    spec.size_factor = 1.0 / 6.0;
    spec.seed = 20260810;
    spec.hp.cnn_epochs = 15;
    spec.hp.cnn_batch = 10;
    spec.hp.cnn_rate = 0.5;
    spec.hp.dbn_hidden = {10, 10, 20};
    spec.hp.dbn_pretrain_epochs = 10;
    spec.hp.dbn_bp_epochs = 100;
    spec.hp.dbn_batch = 25;
    spec.hp.dbn_rate = 0.1;
    spec.hp.adaboost_q = 20;
    auto rows = run_sweep(spec);
    for (const auto& row : rows) {
        char msg[128];
        std::snprintf(msg, sizeof(msg), "%s on %s: accuracy %.4f >= 0.99",
                      std::string(demod_name(row.demod)).c_str(),
                      std::string(scheme_name(row.scheme)).c_str(), row.accuracy);
        r.require(row.status == "ok" && row.accuracy >= 0.99, msg);
    }
}

// ------------------------------------------------------------------ 6
void criterion_snr_trend(Report& r) {
    SweepSpec spec;
    spec.demodulators = {Demod::cnn, Demod::dbn, Demod::adaboost, Demod::mld};
    spec.schemes = {Scheme::qam32};
    spec.axis = "snr";
    spec.axis_values = {0.0, 7.5, 15.0, 22.5, 30.0};
    spec.n = 40;
    spec.size_factor = 1.0 / 12.0;
    spec.seed = 20260810;
    spec.hp.cnn_epochs = 30;
    spec.hp.cnn_batch = 10;
    spec.hp.cnn_rate = 0.5;
    spec.hp.dbn_hidden = {100, 100, 400};
    spec.hp.dbn_pretrain_epochs = 15;
    spec.hp.dbn_bp_epochs = 60;
    spec.hp.dbn_batch = 25;
    spec.hp.dbn_rate = 0.1;
    spec.hp.adaboost_q = 20;
    auto rows = run_sweep(spec);

    std::map<Demod, std::vector<double>> acc;  // ascending snr order
    for (const auto& row : rows) acc[row.demod].push_back(row.accuracy);

    for (auto d : spec.demodulators) {
        const auto& a = acc[d];
        bool monotone = true;
        for (std::size_t i = 0; i + 1 < a.size(); ++i)
            monotone &= a[i] <= a[i + 1] + 0.02;  // within 2pp going down in snr
        std::ostringstream msg;
        msg << demod_name(d) << " non-increasing toward low snr (2pp slack):";
        for (double v : a) msg << ' ' << fmt(v);
        r.require(monotone, msg.str());
    }
    auto mean = [&](Demod d) {
        double m = 0;
        for (double v : acc[d]) m += v;
        return m / double(acc[d].size());
    };
    double ada = mean(Demod::adaboost);
    for (auto d : {Demod::cnn, Demod::dbn, Demod::mld}) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "adaboost mean %.4f >= %s mean %.4f - 0.01", ada,
                      std::string(demod_name(d)).c_str(), mean(d));
        r.require(ada >= mean(d) - 0.01, msg);
    }
}

// ------------------------------------------------------------------ 7
void criterion_order_trend(Report& r) {
    SweepSpec spec;
    spec.demodulators = {Demod::adaboost};
    spec.schemes = {Scheme::qam16, Scheme::qam64, Scheme::qam256};
    spec.axis = "snr";
    spec.axis_values = {15.0};
    spec.n = 40;
    spec.size_factor = 1.0 / 12.0;
    spec.seed = 20260810;
    spec.hp.adaboost_q = 20;
    auto rows = run_sweep(spec);
    std::map<Scheme, double> acc;
    for (const auto& row : rows) acc[row.scheme] = row.accuracy;
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "16-QAM %.4f, 64-QAM %.4f, 256-QAM %.4f ordered within 1pp",
                  acc[Scheme::qam16], acc[Scheme::qam64], acc[Scheme::qam256]);
    bool ok = acc[Scheme::qam16] >= acc[Scheme::qam64] - 0.01 &&
              acc[Scheme::qam64] >= acc[Scheme::qam256] - 0.01;
    r.require(ok, msg);
}

// ------------------------------------------------------------------ 8
void criterion_abr_crossover(Report& r) {
    SweepSpec spec;
    spec.demodulators = {Demod::adaboost};
    spec.schemes = {Scheme::qpsk, Scheme::qam16, Scheme::qam64, Scheme::qam256};
    spec.axis = "snr";
    spec.axis_values = {0.0, 7.5, 15.0, 22.5, 30.0};
    spec.n = 40;
    spec.size_factor = 1.0 / 12.0;
    spec.seed = 20260810;
    spec.hp.adaboost_q = 20;
    auto rows = run_sweep(spec);

    std::map<double, std::pair<Scheme, double>> best;  // snr -> argmax scheme
    for (const auto& row : rows) {
        auto& slot = best[row.axis_value];
        if (slot.second == 0.0 || row.accurate_bit_rate > slot.second)
            slot = {row.scheme, row.accurate_bit_rate};
    }
    for (const auto& [snr, top] : best) {
        std::ostringstream msg;
        msg << "snr " << snr << " dB: best accurate bit rate "
            << fmt(top.second) << " from " << scheme_name(top.first);
        r.note(msg.str());
    }
    auto high = best[30.0].first;
    auto low = best[0.0].first;
    bool high_is_high_order_qam = high == Scheme::qam64 ||
                                  high == Scheme::qam128 ||
                                  high == Scheme::qam256;
    r.require(high_is_high_order_qam,
              "a higher-order QAM wins at the top of the sweep");
    double bits_high = ModulationScheme::of(high).bits_per_symbol;
    double bits_low = ModulationScheme::of(low).bits_per_symbol;
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "argmax moves down-order toward 0 dB (%.0f -> %.0f bits)",
                  bits_high, bits_low);
    r.require(bits_low < bits_high, msg);
}

// ------------------------------------------------------------------ 9
void criterion_determinism(Report& r) {
    SweepSpec spec;
    spec.demodulators = {Demod::adaboost, Demod::mld};
    spec.schemes = {Scheme::qpsk};
    spec.axis = "snr";
    spec.axis_values = {5.0, 20.0};
    spec.size_factor = 0.01;
    spec.hp.adaboost_q = 5;
    spec.seed = 99;
    std::ostringstream a, b;
    emit_csv(run_sweep(spec), a);
    emit_csv(run_sweep(spec), b);
    r.require(!a.str().empty() && a.str() == b.str(),
              "repeated sweep emits a byte-identical CSV");
}

// ------------------------------------------------------------------ 10
void criterion_persistence(Report& r) {
    ChannelConfig cfg;
    cfg.snr_db = 20.0;
    auto ds = build_dataset(ModulationScheme::of(Scheme::qam16), 20, 64, cfg, 42);
    auto ds_bytes = dataset_to_binary(ds);
    r.require(fnv1a64(ds_bytes.data(), ds_bytes.size()) == 0x9f89860ae0a8abddULL,
              "dataset checksum fixture");
    r.require(dataset_to_binary(dataset_from_binary(ds_bytes)) == ds_bytes,
              "dataset binary round trip is byte-stable");

    auto cnn = CnnParams::make(Scheme::qpsk, 40, 4, 7);
    auto cnn_bytes = model_to_bytes(cnn);
    r.require(fnv1a64(cnn_bytes.data(), cnn_bytes.size()) == 0xc6b9b16dbc3a5cb3ULL,
              "cnn model checksum fixture");
    r.require(model_to_bytes(std::get<CnnParams>(model_from_bytes(cnn_bytes))) ==
                  cnn_bytes,
              "cnn model round trip is byte-stable");

    auto dbn = make_dbn(Scheme::qam16, 20, {12, 10, 16}, 16, 11);
    auto dbn_bytes = model_to_bytes(dbn);
    r.require(fnv1a64(dbn_bytes.data(), dbn_bytes.size()) == 0xf22e9fa3da1c492aULL,
              "dbn model checksum fixture");
    r.require(model_to_bytes(std::get<DbnParams>(model_from_bytes(dbn_bytes))) ==
                  dbn_bytes,
              "dbn model round trip is byte-stable");

    auto mld = fit_mld(ds);
    auto mld_bytes = model_to_bytes(mld);
    r.require(fnv1a64(mld_bytes.data(), mld_bytes.size()) == 0xe876b81d35e03fddULL,
              "mld model checksum fixture");
    r.require(model_to_bytes(std::get<MldParams>(model_from_bytes(mld_bytes))) ==
                  mld_bytes,
              "mld model round trip is byte-stable");

    auto ada = train_adaboost(ds, 3, 9);
    auto ada_bytes = model_to_bytes(ada);
    r.require(fnv1a64(ada_bytes.data(), ada_bytes.size()) == 0x9516f57b986b160aULL,
              "adaboost model checksum fixture");
    r.require(
        model_to_bytes(std::get<AdaBoostModel>(model_from_bytes(ada_bytes))) ==
            ada_bytes,
        "adaboost model round trip is byte-stable");
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<void(Report&)> run;
};

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "CNN shape conformance", 1.0, criterion_shapes},
        {2, "finite-difference gradient correctness", 30.0, criterion_gradients},
        {3, "RBM conditionals and likelihood ascent", 60.0, criterion_rbm_exactness},
        {4, "AdaBoost algebra", 10.0, criterion_adaboost_algebra},
        {5, "high-SNR end-to-end accuracy", 600.0, criterion_high_snr},
        {6, "32-QAM accuracy vs SNR trend", 1800.0, criterion_snr_trend},
        {7, "modulation-order trend", 1200.0, criterion_order_trend},
        {8, "accurate-bit-rate crossover", 1200.0, criterion_abr_crossover},
        {9, "sweep determinism", 120.0, criterion_determinism},
        {10, "persistence round trips", 120.0, criterion_persistence},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Report report;
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(report);
        } catch (const std::exception& e) {
            report.require(false, std::string("unexpected exception: ") + e.what());
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        bool in_time = elapsed < c.limit_s;
        bool pass = report.ok && in_time;
        failures += !pass;
        std::printf("[%s] criterion %2d: %s (%.1fs, limit %.0fs)\n",
                    pass ? "PASS" : "FAIL", c.id, c.name, elapsed, c.limit_s);
        for (const auto& line : report.notes) std::puts(line.c_str());
        if (!in_time) std::puts("    FAIL exceeded the runtime limit");
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::puts("all acceptance criteria passed");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
}
