#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "owd/baseline_mld.hpp"
#include "owd/dataset.hpp"
#include "owd/demod_adaboost.hpp"
#include "owd/demod_cnn.hpp"
#include "owd/demod_dbn.hpp"

namespace owd {

// Shared model container: "OWM1", kind u8, scheme u8, n u16, n_classes u16,
// then kind-specific sections. Real arrays carry a rank/dims header so a
// malformed file fails with an offset instead of garbage weights.
enum class ModelKind : std::uint8_t { cnn = 1, dbn = 2, adaboost = 3, mld = 4 };

namespace detail {

inline void write_f64_array(ByteWriter& w, std::span<const double> data,
                            std::span<const std::uint32_t> dims) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(dims.size()));
    std::size_t total = 1;
    for (auto d : dims) {
        w.put<std::uint32_t>(d);
        total *= d;
    }
    if (total != data.size()) throw Error("array dims do not match data size");
    for (double v : data) w.put<double>(v);
}

inline std::vector<double> read_f64_array(
    ByteReader& r, std::span<const std::uint32_t> expect_dims,
    const char* what) {
    auto rank = r.get<std::uint8_t>(what);
    if (rank != expect_dims.size())
        throw ParseError(std::string(what) + ": unexpected array rank",
                         r.pos - 1);
    std::size_t total = 1;
    for (auto want : expect_dims) {
        auto got = r.get<std::uint32_t>(what);
        if (got != want)
            throw ParseError(std::string(what) + ": unexpected dimension",
                             r.pos - 4);
        total *= want;
    }
    std::vector<double> out(total);
    for (auto& v : out) v = r.get<double>(what);
    return out;
}

inline void write_header(ByteWriter& w, ModelKind kind, Scheme scheme, int n,
                         int n_classes) {
    w.raw("OWM1", 4);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(kind));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(scheme));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(n));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(n_classes));
}

}  // namespace detail

inline std::string model_to_bytes(const CnnParams& p) {
    detail::ByteWriter w;
    detail::write_header(w, ModelKind::cnn, p.scheme_kind, p.n, p.n_classes);
    std::vector<double> k1;
    for (const auto& k : p.k1) k1.insert(k1.end(), k.a.begin(), k.a.end());
    detail::write_f64_array(w, k1, std::vector<std::uint32_t>{6, 5, 5});
    detail::write_f64_array(w, std::vector<double>(p.b1.begin(), p.b1.end()),
                            std::vector<std::uint32_t>{6});
    std::vector<double> k2;
    for (const auto& row : p.k2)
        for (const auto& k : row) k2.insert(k2.end(), k.a.begin(), k.a.end());
    detail::write_f64_array(w, k2, std::vector<std::uint32_t>{12, 6, 3, 3});
    detail::write_f64_array(w, std::vector<double>(p.b2.begin(), p.b2.end()),
                            std::vector<std::uint32_t>{12});
    detail::write_f64_array(
        w, p.fc.w.a,
        std::vector<std::uint32_t>{static_cast<std::uint32_t>(p.n_classes),
                                   CnnParams::fc_inputs});
    detail::write_f64_array(
        w, p.fc.b,
        std::vector<std::uint32_t>{static_cast<std::uint32_t>(p.n_classes)});
    return std::move(w.bytes);
}

inline std::string model_to_bytes(const DbnParams& p) {
    detail::ByteWriter w;
    detail::write_header(w, ModelKind::dbn, p.scheme_kind, p.n, p.n_classes);
    auto sizes = p.hidden_sizes();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(sizes[0]));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(sizes[1]));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(sizes[2]));
    auto dump_rbm = [&](const Rbm& r) {
        auto h = static_cast<std::uint32_t>(r.hidden_units());
        auto v = static_cast<std::uint32_t>(r.visible_units());
        detail::write_f64_array(w, r.w.a, std::vector<std::uint32_t>{h, v});
        detail::write_f64_array(w, r.a, std::vector<std::uint32_t>{v});
        detail::write_f64_array(w, r.b, std::vector<std::uint32_t>{h});
    };
    dump_rbm(p.rbm1);
    dump_rbm(p.rbm2);
    dump_rbm(p.rbm3);
    detail::write_f64_array(
        w, p.out.w.a,
        std::vector<std::uint32_t>{static_cast<std::uint32_t>(p.n_classes),
                                   static_cast<std::uint32_t>(sizes[2])});
    detail::write_f64_array(
        w, p.out.b,
        std::vector<std::uint32_t>{static_cast<std::uint32_t>(p.n_classes)});
    return std::move(w.bytes);
}

inline std::string model_to_bytes(const AdaBoostModel& m) {
    detail::ByteWriter w;
    detail::write_header(w, ModelKind::adaboost, m.training_set.scheme.kind,
                         m.training_set.n, m.n_classes());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.learners.size()));
    for (const auto& l : m.learners) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(l.subset.size()));
        for (auto idx : l.subset) w.put<std::uint32_t>(idx);
        w.put<double>(l.beta);
    }
    auto ds = dataset_to_binary(m.training_set);
    w.put<std::uint64_t>(ds.size());
    w.raw(ds.data(), ds.size());
    return std::move(w.bytes);
}

inline std::string model_to_bytes(const MldParams& p) {
    detail::ByteWriter w;
    detail::write_header(w, ModelKind::mld, p.scheme_kind, p.n, p.n_classes);
    auto n = static_cast<std::uint32_t>(p.n);
    for (const auto& cls : p.classes) {
        detail::write_f64_array(w, cls.mean, std::vector<std::uint32_t>{n});
        detail::write_f64_array(w, cls.cov.a, std::vector<std::uint32_t>{n, n});
    }
    return std::move(w.bytes);
}

using AnyModel = std::variant<CnnParams, DbnParams, AdaBoostModel, MldParams>;

inline AnyModel model_from_bytes(std::span<const char> bytes) {
    detail::ByteReader r{bytes};
    char magic[4];
    r.raw(magic, 4, "magic");
    if (std::memcmp(magic, "OWM", 3) != 0)
        throw ParseError("not a model file (bad magic)", 0);
    if (magic[3] != '1')
        throw ParseError(std::string("unsupported model format version '") +
                             magic[3] + "'",
                         3);
    auto kind = r.get<std::uint8_t>("model kind");
    auto scheme_id = r.get<std::uint8_t>("scheme id");
    if (scheme_id > 7) throw ParseError("invalid scheme id", r.pos - 1);
    auto scheme = static_cast<Scheme>(scheme_id);
    int n = r.get<std::uint16_t>("n");
    int n_classes = r.get<std::uint16_t>("n_classes");

    switch (static_cast<ModelKind>(kind)) {
        case ModelKind::cnn: {
            CnnParams p;
            p.scheme_kind = scheme;
            p.n = n;
            p.n_classes = n_classes;
            auto k1 = detail::read_f64_array(
                r, std::vector<std::uint32_t>{6, 5, 5}, "k1");
            for (int i = 0; i < 6; ++i) {
                p.k1[static_cast<std::size_t>(i)] = Mat(5, 5);
                std::copy_n(k1.begin() + i * 25, 25,
                            p.k1[static_cast<std::size_t>(i)].a.begin());
            }
            auto b1 = detail::read_f64_array(r, std::vector<std::uint32_t>{6},
                                             "b1");
            std::copy(b1.begin(), b1.end(), p.b1.begin());
            auto k2 = detail::read_f64_array(
                r, std::vector<std::uint32_t>{12, 6, 3, 3}, "k2");
            for (int j = 0; j < 12; ++j)
                for (int i = 0; i < 6; ++i) {
                    auto& k = p.k2[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
                    k = Mat(3, 3);
                    std::copy_n(k2.begin() + (j * 6 + i) * 9, 9, k.a.begin());
                }
            auto b2 = detail::read_f64_array(r, std::vector<std::uint32_t>{12},
                                             "b2");
            std::copy(b2.begin(), b2.end(), p.b2.begin());
            p.fc = DenseLayer(n_classes, CnnParams::fc_inputs);
            p.fc.w.a = detail::read_f64_array(
                r,
                std::vector<std::uint32_t>{static_cast<std::uint32_t>(n_classes),
                                           CnnParams::fc_inputs},
                "fc weights");
            p.fc.b = detail::read_f64_array(
                r,
                std::vector<std::uint32_t>{static_cast<std::uint32_t>(n_classes)},
                "fc bias");
            return p;
        }
        case ModelKind::dbn: {
            DbnParams p;
            p.scheme_kind = scheme;
            p.n = n;
            p.n_classes = n_classes;
            std::uint32_t h1 = r.get<std::uint32_t>("h1");
            std::uint32_t h2 = r.get<std::uint32_t>("h2");
            std::uint32_t h3 = r.get<std::uint32_t>("h3");
            auto read_rbm = [&](std::uint32_t vis, std::uint32_t hid,
                                const char* what) {
                Rbm rb;
                rb.w = Mat(static_cast<int>(hid), static_cast<int>(vis));
                rb.w.a = detail::read_f64_array(
                    r, std::vector<std::uint32_t>{hid, vis}, what);
                rb.a = detail::read_f64_array(r, std::vector<std::uint32_t>{vis},
                                              what);
                rb.b = detail::read_f64_array(r, std::vector<std::uint32_t>{hid},
                                              what);
                return rb;
            };
            p.rbm1 = read_rbm(static_cast<std::uint32_t>(n), h1, "rbm1");
            p.rbm2 = read_rbm(h1, h2, "rbm2");
            p.rbm3 = read_rbm(h2, h3, "rbm3");
            p.out = DenseLayer(n_classes, static_cast<int>(h3));
            p.out.w.a = detail::read_f64_array(
                r,
                std::vector<std::uint32_t>{static_cast<std::uint32_t>(n_classes), h3},
                "output weights");
            p.out.b = detail::read_f64_array(
                r,
                std::vector<std::uint32_t>{static_cast<std::uint32_t>(n_classes)},
                "output bias");
            return p;
        }
        case ModelKind::adaboost: {
            AdaBoostModel m;
            auto q = r.get<std::uint32_t>("learner count");
            m.learners.resize(q);
            for (auto& l : m.learners) {
                auto sz = r.get<std::uint32_t>("subset size");
                l.subset.resize(sz);
                for (auto& idx : l.subset) idx = r.get<std::uint32_t>("subset index");
                l.beta = r.get<double>("beta");
                if (!(l.beta > 0.0))
                    throw ParseError("beta must be positive", r.pos - 8);
            }
            auto len = r.get<std::uint64_t>("dataset blob length");
            if (r.pos + len > bytes.size())
                throw ParseError("truncated embedded dataset", r.pos);
            m.training_set =
                dataset_from_binary(bytes.subspan(r.pos, static_cast<std::size_t>(len)));
            for (const auto& l : m.learners)
                for (auto idx : l.subset)
                    if (idx >= m.training_set.frames.size())
                        throw ParseError("subset index out of range", r.pos);
            if (m.training_set.scheme.kind != scheme || m.training_set.n != n)
                throw ParseError("embedded dataset does not match header", r.pos);
            return m;
        }
        case ModelKind::mld: {
            MldParams p;
            p.scheme_kind = scheme;
            p.n = n;
            p.n_classes = n_classes;
            p.classes.resize(static_cast<std::size_t>(n_classes));
            auto un = static_cast<std::uint32_t>(n);
            for (auto& cls : p.classes) {
                cls.mean = detail::read_f64_array(
                    r, std::vector<std::uint32_t>{un}, "class mean");
                cls.cov = Mat(n, n);
                cls.cov.a = detail::read_f64_array(
                    r, std::vector<std::uint32_t>{un, un}, "class covariance");
                mld_finalize_class(cls);
            }
            return p;
        }
        default:
            throw ParseError("unknown model kind " + std::to_string(kind), 4);
    }
}

template <typename ModelT>
void save_model(const ModelT& model, const std::string& path) {
    detail::write_file(path, model_to_bytes(model));
}

inline AnyModel load_model(const std::string& path) {
    auto data = detail::read_file(path);
    return model_from_bytes(std::span<const char>(data));
}

inline ModelKind kind_of(const AnyModel& m) {
    if (std::holds_alternative<CnnParams>(m)) return ModelKind::cnn;
    if (std::holds_alternative<DbnParams>(m)) return ModelKind::dbn;
    if (std::holds_alternative<AdaBoostModel>(m)) return ModelKind::adaboost;
    return ModelKind::mld;
}

}  // namespace owd
