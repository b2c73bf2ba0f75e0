#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "owd/baseline_mld.hpp"
#include "owd/channel.hpp"
#include "owd/dataset.hpp"
#include "owd/demod_adaboost.hpp"
#include "owd/demod_cnn.hpp"
#include "owd/demod_dbn.hpp"
#include "owd/serialize.hpp"

namespace owd {

enum class Demod : std::uint8_t { cnn = 0, dbn = 1, adaboost = 2, mld = 3 };

inline std::string_view demod_name(Demod d) {
    switch (d) {
        case Demod::cnn: return "cnn";
        case Demod::dbn: return "dbn";
        case Demod::adaboost: return "adaboost";
        case Demod::mld: return "mld";
    }
    return "?";
}

inline Demod demod_from_name(std::string_view name) {
    for (auto d : {Demod::cnn, Demod::dbn, Demod::adaboost, Demod::mld})
        if (demod_name(d) == name) return d;
    throw Error("unknown demodulator: " + std::string(name));
}

struct TableSizes {
    int train = 0;
    int test = 0;
};

// Training/testing pool sizes of the reference experiments.
inline TableSizes reference_sizes(Scheme kind) {
    switch (kind) {
        case Scheme::ook: return {12000, 6000};
        case Scheme::qpsk: return {12000, 6000};
        case Scheme::ppm4: return {7500, 3750};
        case Scheme::qam16: return {12000, 6000};
        case Scheme::qam32: return {24000, 12000};
        default: return {48000, 24000};  // 64/128/256-QAM
    }
}

// 4-PPM needs whole chips; a non-chip-aligned n falls to the next multiple
// of four below it (10 -> 8).
inline int effective_n(Scheme kind, int n) {
    if (kind == Scheme::ppm4 && n % 4 != 0) return n - n % 4;
    return n;
}

struct HyperParams {
    int cnn_epochs = 150;
    double cnn_rate = 0.1;
    int cnn_batch = 100;
    int dbn_pretrain_epochs = 100;
    int dbn_bp_epochs = 100;
    double dbn_rate = 0.1;
    int dbn_batch = 100;
    std::array<int, 3> dbn_hidden = {0, 0, 0};  // zeros: per-scheme default
    int adaboost_q = 20;
};

inline AnyModel train_demodulator(Demod demod, const LabeledDataset& train_set,
                                  const HyperParams& hp, std::uint64_t seed) {
    switch (demod) {
        case Demod::cnn: {
            SgdConfig sgd;
            sgd.learning_rate = hp.cnn_rate;
            sgd.batch_size = std::min(hp.cnn_batch, train_set.k());
            sgd.epochs = hp.cnn_epochs;
            sgd.seed = seed;
            return train_cnn(train_set, sgd);
        }
        case Demod::dbn: {
            DbnTrainConfig cfg;
            cfg.hidden = hp.dbn_hidden;
            cfg.pretrain_epochs = hp.dbn_pretrain_epochs;
            cfg.pretrain_rate = hp.dbn_rate;
            cfg.bp.learning_rate = hp.dbn_rate;
            cfg.bp.batch_size = std::min(hp.dbn_batch, train_set.k());
            cfg.bp.epochs = hp.dbn_bp_epochs;
            return train_dbn(train_set, cfg, seed);
        }
        case Demod::adaboost:
            return train_adaboost(train_set, hp.adaboost_q, seed);
        case Demod::mld:
            return fit_mld(train_set);
    }
    throw Error("unreachable demodulator kind");
}

namespace detail {

template <typename ClassifyOne>
double accuracy_over(const LabeledDataset& test_set, ClassifyOne&& fn,
                     std::size_t serial_below = 256) {
    std::vector<std::uint8_t> correct(test_set.frames.size());
    parallel_for(
        test_set.frames.size(),
        [&](std::size_t i) {
            correct[i] = fn(test_set.frames[i]) == test_set.frames[i].label;
        },
        serial_below);
    double total = 0.0;
    for (auto c : correct) total += c;
    return total / static_cast<double>(test_set.frames.size());
}

}  // namespace detail

inline double evaluate(const AnyModel& model, const LabeledDataset& test_set) {
    if (test_set.frames.empty()) throw Error("empty test set");
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DbnParams>) {
                if (m.scheme_kind != test_set.scheme.kind)
                    throw Error("dataset scheme does not match the model");
                Mlp net = dbn_as_mlp(m);
                return detail::accuracy_over(test_set, [&](const WaveformFrame& f) {
                    return 1 + argmax_index(net.forward(f.samples));
                });
            } else if constexpr (std::is_same_v<T, AdaBoostModel>) {
                if (m.training_set.scheme.kind != test_set.scheme.kind)
                    throw Error("dataset scheme does not match the model");
                return detail::accuracy_over(
                    test_set,
                    [&](const WaveformFrame& f) { return classify(m, f).label; },
                    16);
            } else {
                if (m.scheme_kind != test_set.scheme.kind)
                    throw Error("dataset scheme does not match the model");
                return detail::accuracy_over(
                    test_set,
                    [&](const WaveformFrame& f) { return classify(m, f).label; },
                    64);
            }
        },
        model);
}

struct SweepSpec {
    std::vector<Demod> demodulators = {Demod::mld};
    std::vector<Scheme> schemes = {Scheme::ook};
    std::string axis = "snr";  // snr | distance | n | k | epochs
    std::vector<double> axis_values = {30.0};
    int trials = 1;
    std::uint64_t seed = 0;
    double size_factor = 1.0 / 6.0;
    int n = 40;
    double snr_db = 30.0;  // channel when the axis is not snr/distance

    // distance-mode channel parameters
    double noise_sigma = 0.05;
    double ref_distance_cm = 10.0;
    double path_exponent = 2.0;
    double ref_gain = 1.0;

    bool joint_normalization = false;
    HyperParams hp;
};

struct ResultRow {
    Demod demod = Demod::mld;
    Scheme scheme = Scheme::ook;
    std::string axis;
    double axis_value = 0.0;
    int n = 0;
    int train_k = 0;
    int test_k = 0;
    int trial = 0;
    double distance_cm = std::numeric_limits<double>::quiet_NaN();
    double snr_db = 0.0;
    double accuracy = std::numeric_limits<double>::quiet_NaN();
    double accurate_bit_rate = std::numeric_limits<double>::quiet_NaN();
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
    std::string status = "ok";
};

inline void validate(const SweepSpec& spec) {
    if (spec.demodulators.empty()) throw Error("sweep needs demodulators");
    if (spec.schemes.empty()) throw Error("sweep needs schemes");
    if (spec.axis_values.empty()) throw Error("sweep needs axis values");
    if (spec.trials < 1) throw Error("trials must be >= 1");
    if (spec.size_factor <= 0.0) throw Error("size_factor must be positive");
    for (std::size_t i = 1; i < spec.axis_values.size(); ++i)
        if (!(spec.axis_values[i] > spec.axis_values[i - 1]))
            throw Error("axis values must be strictly increasing");
    if (spec.axis != "snr" && spec.axis != "distance" && spec.axis != "n" &&
        spec.axis != "k" && spec.axis != "epochs")
        throw Error("unknown sweep axis: " + spec.axis);
}

// One sweep point: fresh train/test pools (test normalized with the
// training statistics unless joint mode is on), one model per demodulator,
// test accuracy per model. Failures are recorded in the row status; the
// sweep continues.
inline std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
    validate(spec);
    std::vector<ResultRow> rows;

    for (int trial = 0; trial < spec.trials; ++trial) {
        for (std::size_t si = 0; si < spec.schemes.size(); ++si) {
            Scheme kind = spec.schemes[si];
            auto scheme = ModulationScheme::of(kind);
            for (std::size_t ai = 0; ai < spec.axis_values.size(); ++ai) {
                double axis_value = spec.axis_values[ai];
                std::uint64_t point_seed = derive_seed(
                    derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(trial)),
                                si),
                    ai);

                ChannelConfig channel;
                if (spec.axis == "distance") {
                    channel.mode = ChannelMode::distance;
                    channel.distance_cm = axis_value;
                    channel.ref_distance_cm = spec.ref_distance_cm;
                    channel.path_exponent = spec.path_exponent;
                    channel.ref_gain = spec.ref_gain;
                    channel.noise_sigma = spec.noise_sigma;
                } else {
                    channel.mode = ChannelMode::direct_snr;
                    channel.snr_db = spec.axis == "snr" ? axis_value : spec.snr_db;
                }

                int n = effective_n(
                    kind, spec.axis == "n" ? static_cast<int>(axis_value) : spec.n);
                auto sizes = reference_sizes(kind);
                int train_k = std::max(
                    scheme.alphabet_size * 2,
                    static_cast<int>(std::lround(sizes.train * spec.size_factor)));
                int test_k = std::max(
                    scheme.alphabet_size,
                    static_cast<int>(std::lround(sizes.test * spec.size_factor)));
                if (spec.axis == "k") {
                    train_k = std::max(scheme.alphabet_size * 2,
                                       static_cast<int>(axis_value));
                    test_k = std::max(scheme.alphabet_size, train_k / 2);
                }

                HyperParams hp = spec.hp;
                if (spec.axis == "epochs") {
                    hp.cnn_epochs = static_cast<int>(axis_value);
                    hp.dbn_bp_epochs = static_cast<int>(axis_value);
                }

                LabeledDataset train_ds, test_ds;
                if (spec.joint_normalization) {
                    auto pool = build_dataset(scheme, n, train_k + test_k, channel,
                                              derive_seed(point_seed, 0));
                    double fraction = static_cast<double>(train_k) /
                                      static_cast<double>(train_k + test_k);
                    auto parts = split(pool, fraction);
                    train_ds = std::move(parts.first);
                    test_ds = std::move(parts.second);
                } else {
                    train_ds = build_dataset(scheme, n, train_k, channel,
                                             derive_seed(point_seed, 0));
                    test_ds = build_dataset(
                        scheme, n, test_k, channel, derive_seed(point_seed, 1), {},
                        std::pair{train_ds.y_min, train_ds.y_max});
                }

                for (std::size_t di = 0; di < spec.demodulators.size(); ++di) {
                    Demod demod = spec.demodulators[di];
                    ResultRow row;
                    row.demod = demod;
                    row.scheme = kind;
                    row.axis = spec.axis;
                    row.axis_value = axis_value;
                    row.n = n;
                    row.train_k = train_ds.k();
                    row.test_k = test_ds.k();
                    row.trial = trial;
                    row.snr_db = train_ds.snr_db();
                    if (spec.axis == "distance") row.distance_cm = axis_value;
                    row.seed = point_seed;

                    auto t0 = std::chrono::steady_clock::now();
                    try {
                        auto model = train_demodulator(
                            demod, train_ds, hp, derive_seed(point_seed, 16 + di));
                        row.accuracy = evaluate(model, test_ds);
                        row.accurate_bit_rate =
                            row.accuracy * scheme.bits_per_symbol;
                    } catch (const Error& e) {
                        row.status = e.what();
                    }
                    row.wall_time_s =
                        std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    return rows;
}

namespace detail {

inline std::string csv_field(double v) {
    if (std::isnan(v)) return "";
    return format_double(v);
}

}  // namespace detail

// Timings default off so identical runs emit byte-identical files.
inline void emit_csv(const std::vector<ResultRow>& rows, std::ostream& out,
                     bool include_timings = false) {
    out << "demodulator,scheme,axis,axis_value,n,train_k,test_k,trial,"
           "distance_cm,snr_db,accuracy,accurate_bit_rate,seed,status";
    if (include_timings) out << ",wall_time_s";
    out << "\n";
    for (const auto& r : rows) {
        out << demod_name(r.demod) << ',' << scheme_name(r.scheme) << ','
            << r.axis << ',' << detail::format_double(r.axis_value) << ',' << r.n
            << ',' << r.train_k << ',' << r.test_k << ',' << r.trial << ','
            << detail::csv_field(r.distance_cm) << ','
            << detail::csv_field(r.snr_db) << ',' << detail::csv_field(r.accuracy)
            << ',' << detail::csv_field(r.accurate_bit_rate) << ',' << r.seed
            << ",\"" << r.status << "\"";
        if (include_timings) out << ',' << detail::format_double(r.wall_time_s);
        out << "\n";
    }
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path,
                     bool include_timings = false) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for writing: " + path);
    emit_csv(rows, out, include_timings);
    if (!out) throw Error("write failed: " + path);
}

inline std::string summarize(const std::vector<ResultRow>& rows) {
    struct Agg {
        int points = 0;
        double acc = 0.0;
        double abr = 0.0;
        double wall = 0.0;
        int failed = 0;
    };
    std::map<std::pair<std::string, std::string>, Agg> groups;
    for (const auto& r : rows) {
        auto& g = groups[{std::string(demod_name(r.demod)),
                          std::string(scheme_name(r.scheme))}];
        if (std::isnan(r.accuracy)) {
            ++g.failed;
        } else {
            ++g.points;
            g.acc += r.accuracy;
            g.abr += r.accurate_bit_rate;
        }
        g.wall += r.wall_time_s;
    }
    std::ostringstream out;
    out << "demodulator  scheme    points  mean_acc  mean_abr  wall_s  failed\n";
    for (const auto& [key, g] : groups) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-12s %-8s %7d %9.4f %9.4f %7.1f %7d\n",
                      key.first.c_str(), key.second.c_str(), g.points,
                      g.points ? g.acc / g.points : 0.0,
                      g.points ? g.abr / g.points : 0.0, g.wall, g.failed);
        out << line;
    }
    return out.str();
}

// key=value sweep description; '#' starts a comment. Lists are
// comma-separated.
inline SweepSpec parse_sweep_config(const std::string& text) {
    SweepSpec spec;
    spec.demodulators.clear();
    spec.schemes.clear();
    spec.axis_values.clear();

    auto split_list = [](std::string_view v) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= v.size()) {
            std::size_t comma = v.find(',', start);
            if (comma == std::string_view::npos) comma = v.size();
            auto tok = v.substr(start, comma - start);
            while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
            while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
            if (!tok.empty()) parts.emplace_back(tok);
            start = comma + 1;
        }
        return parts;
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        std::size_t line_off = pos;
        pos = eol + 1;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
            line.remove_suffix(1);
        while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("config line without '='", line_off);
        std::string key(line.substr(0, eq));
        std::string val(line.substr(eq + 1));
        std::size_t voff = line_off + eq + 1;

        using detail::parse_double;
        using detail::parse_int;
        using detail::parse_uint64;
        if (key == "demods" || key == "demodulators") {
            for (const auto& d : split_list(val))
                spec.demodulators.push_back(demod_from_name(d));
        } else if (key == "schemes" || key == "scheme") {
            for (const auto& s : split_list(val))
                spec.schemes.push_back(scheme_from_name(s).kind);
        } else if (key == "axis") {
            spec.axis = val;
        } else if (key == "values") {
            for (const auto& v : split_list(val))
                spec.axis_values.push_back(parse_double(v, voff, "axis value"));
        } else if (key == "trials") {
            spec.trials = static_cast<int>(parse_int(val, voff, "trials"));
        } else if (key == "seed") {
            spec.seed = parse_uint64(val, voff, "seed");
        } else if (key == "size_factor") {
            spec.size_factor = parse_double(val, voff, "size_factor");
        } else if (key == "n") {
            spec.n = static_cast<int>(parse_int(val, voff, "n"));
        } else if (key == "snr_db") {
            spec.snr_db = parse_double(val, voff, "snr_db");
        } else if (key == "noise_sigma") {
            spec.noise_sigma = parse_double(val, voff, "noise_sigma");
        } else if (key == "ref_distance_cm") {
            spec.ref_distance_cm = parse_double(val, voff, "ref_distance_cm");
        } else if (key == "path_exponent") {
            spec.path_exponent = parse_double(val, voff, "path_exponent");
        } else if (key == "ref_gain") {
            spec.ref_gain = parse_double(val, voff, "ref_gain");
        } else if (key == "joint_normalization") {
            spec.joint_normalization = val == "1" || val == "true";
        } else if (key == "cnn_epochs") {
            spec.hp.cnn_epochs = static_cast<int>(parse_int(val, voff, key.c_str()));
        } else if (key == "cnn_rate") {
            spec.hp.cnn_rate = parse_double(val, voff, key.c_str());
        } else if (key == "cnn_batch") {
            spec.hp.cnn_batch = static_cast<int>(parse_int(val, voff, key.c_str()));
        } else if (key == "dbn_pretrain_epochs") {
            spec.hp.dbn_pretrain_epochs =
                static_cast<int>(parse_int(val, voff, key.c_str()));
        } else if (key == "dbn_bp_epochs") {
            spec.hp.dbn_bp_epochs =
                static_cast<int>(parse_int(val, voff, key.c_str()));
        } else if (key == "dbn_rate") {
            spec.hp.dbn_rate = parse_double(val, voff, key.c_str());
        } else if (key == "dbn_batch") {
            spec.hp.dbn_batch = static_cast<int>(parse_int(val, voff, key.c_str()));
        } else if (key == "dbn_hidden") {
            auto parts = split_list(val);
            if (parts.size() != 3)
                throw ParseError("dbn_hidden needs three sizes", voff);
            for (int i = 0; i < 3; ++i)
                spec.hp.dbn_hidden[static_cast<std::size_t>(i)] =
                    static_cast<int>(parse_int(parts[static_cast<std::size_t>(i)],
                                               voff, "dbn_hidden"));
        } else if (key == "q" || key == "adaboost_q") {
            spec.hp.adaboost_q = static_cast<int>(parse_int(val, voff, "q"));
        } else {
            throw ParseError("unknown config key '" + key + "'", line_off);
        }
    }
    if (spec.demodulators.empty()) spec.demodulators = {Demod::mld};
    if (spec.schemes.empty()) spec.schemes = {Scheme::ook};
    if (spec.axis_values.empty()) spec.axis_values = {30.0};
    return spec;
}

}  // namespace owd
