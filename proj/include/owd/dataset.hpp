#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "owd/channel.hpp"
#include "owd/common.hpp"
#include "owd/modulation.hpp"

namespace owd {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

// The labeled training/testing pool: normalized frames plus the
// normalization statistics and the generation snapshot.
struct LabeledDataset {
    ModulationScheme scheme;
    int n = 0;
    std::vector<WaveformFrame> frames;
    double y_min = 0.0;
    double y_max = 1.0;
    std::uint64_t seed = 0;
    ChannelConfig channel;
    double signal_power = 0.0;  // post-gain clean mean-square sample

    int k() const { return static_cast<int>(frames.size()); }
    double snr_db() const {
        if (channel.noise_sigma == 0.0)
            return std::numeric_limits<double>::infinity();
        return 10.0 * std::log10(signal_power /
                                 (channel.noise_sigma * channel.noise_sigma));
    }
};

struct NormalizeResult {
    std::vector<double> samples;
    double y_min = 0.0;
    double y_max = 1.0;
};

// Affine map of the pooled samples onto [0,1]; min maps to 0, max to 1.
inline NormalizeResult normalize(std::span<const double> raw) {
    if (raw.size() < 2) throw Error("normalize needs at least two samples");
    double lo = raw[0], hi = raw[0];
    for (double v : raw) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) throw Error("normalize: degenerate input (zero range)");
    NormalizeResult r;
    r.y_min = lo;
    r.y_max = hi;
    r.samples.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        r.samples[i] = (raw[i] - lo) / (hi - lo);
    return r;
}

// Generates k frames through modulation -> channel -> normalization over the
// pooled samples. Labels are balanced to within one frame per class and the
// order is a seeded shuffle. The channel noise seed and sigma (direct_snr
// mode) are derived here so one dataset seed pins the whole pool.
//
// frozen_stats applies previously computed (y_min, y_max) instead of this
// pool's own extrema (test data normalized with training statistics);
// out-of-range values are clamped to [0,1].
inline LabeledDataset build_dataset(
    const ModulationScheme& scheme, int n, int k, const ChannelConfig& channel,
    std::uint64_t seed, const CarrierConfig& carrier = {},
    std::optional<std::pair<double, double>> frozen_stats = std::nullopt) {
    if (k < scheme.alphabet_size)
        throw Error("dataset needs at least one frame per class");
    check_frame_shape(scheme, n, carrier);

    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(k));
    int base = k / scheme.alphabet_size;
    int extra = k % scheme.alphabet_size;
    for (int c = 1; c <= scheme.alphabet_size; ++c) {
        int count = base + (c <= extra ? 1 : 0);
        labels.insert(labels.end(), static_cast<std::size_t>(count), c);
    }
    Rng shuffle_rng(derive_seed(seed, 0));
    shuffle_rng.shuffle(labels);

    auto clean = modulate_stream(scheme, labels, n, carrier);

    double power = 0.0;
    for (const auto& f : clean)
        for (double s : f.samples) power += s * s;
    power /= static_cast<double>(k) * n;

    ChannelConfig cfg = channel;
    cfg.seed = derive_seed(seed, 1);
    cfg = resolve_noise_sigma(cfg, power);
    auto noisy = apply_channel(clean, cfg);

    LabeledDataset ds;
    ds.scheme = scheme;
    ds.n = n;
    ds.seed = seed;
    ds.channel = cfg;
    double g = channel_gain(cfg);
    ds.signal_power = g * g * power;

    if (frozen_stats) {
        ds.y_min = frozen_stats->first;
        ds.y_max = frozen_stats->second;
        if (!(ds.y_max > ds.y_min)) throw Error("frozen stats need y_max > y_min");
        double range = ds.y_max - ds.y_min;
        for (auto& f : noisy)
            for (auto& s : f.samples)
                s = std::clamp((s - ds.y_min) / range, 0.0, 1.0);
    } else {
        std::vector<double> pooled;
        pooled.reserve(static_cast<std::size_t>(k) * n);
        for (const auto& f : noisy)
            pooled.insert(pooled.end(), f.samples.begin(), f.samples.end());
        auto norm = normalize(pooled);
        ds.y_min = norm.y_min;
        ds.y_max = norm.y_max;
        std::size_t pos = 0;
        for (auto& f : noisy)
            for (auto& s : f.samples) s = norm.samples[pos++];
    }
    ds.frames = std::move(noisy);
    return ds;
}

// Label-stratified split preserving frame order inside each part.
inline std::pair<LabeledDataset, LabeledDataset> split(
    const LabeledDataset& ds, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error("train_fraction must be in (0, 1)");
    std::map<int, int> counts, taken;
    for (const auto& f : ds.frames) ++counts[f.label];

    LabeledDataset train = ds, test = ds;
    train.frames.clear();
    test.frames.clear();
    for (const auto& f : ds.frames) {
        int want = static_cast<int>(
            std::llround(train_fraction * counts[f.label]));
        if (taken[f.label] < want) {
            train.frames.push_back(f);
            ++taken[f.label];
        } else {
            test.frames.push_back(f);
        }
    }
    return {std::move(train), std::move(test)};
}

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t offset,
                           const char* what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError(std::string("bad ") + what + " value '" +
                             std::string(s) + "'",
                         offset);
    return v;
}

inline long long parse_int(std::string_view s, std::size_t offset,
                           const char* what) {
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError(std::string("bad ") + what + " value '" +
                             std::string(s) + "'",
                         offset);
    return v;
}

inline std::uint64_t parse_uint64(std::string_view s, std::size_t offset,
                                  const char* what) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError(std::string("bad ") + what + " value '" +
                             std::string(s) + "'",
                         offset);
    return v;
}

struct ByteWriter {
    std::string bytes;

    void raw(const void* p, std::size_t len) {
        bytes.append(static_cast<const char*>(p), len);
    }
    template <typename T>
    void put(T v) {
        raw(&v, sizeof(T));
    }
};

struct ByteReader {
    std::span<const char> bytes;
    std::size_t pos = 0;

    void raw(void* p, std::size_t len, const char* what) {
        if (pos + len > bytes.size())
            throw ParseError(std::string("truncated file while reading ") + what,
                             pos);
        std::memcpy(p, bytes.data() + pos, len);
        pos += len;
    }
    template <typename T>
    T get(const char* what) {
        T v{};
        raw(&v, sizeof(T), what);
        return v;
    }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return data;
}

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for writing: " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("write failed: " + path);
}

}  // namespace detail

// Binary layout: "OWD1", scheme id u8, n u16, k u32, y_min f64, y_max f64,
// then k records of (label u16, n x f32), all little-endian.
inline std::string dataset_to_binary(const LabeledDataset& ds) {
    detail::ByteWriter w;
    w.raw("OWD1", 4);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(ds.scheme.kind));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(ds.n));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.frames.size()));
    w.put<double>(ds.y_min);
    w.put<double>(ds.y_max);
    for (const auto& f : ds.frames) {
        w.put<std::uint16_t>(static_cast<std::uint16_t>(f.label));
        for (double s : f.samples) w.put<float>(static_cast<float>(s));
    }
    return std::move(w.bytes);
}

inline LabeledDataset dataset_from_binary(std::span<const char> bytes) {
    detail::ByteReader r{bytes};
    char magic[4];
    r.raw(magic, 4, "magic");
    if (std::memcmp(magic, "OWD", 3) != 0)
        throw ParseError("not a dataset file (bad magic)", 0);
    if (magic[3] != '1')
        throw ParseError(std::string("unsupported dataset format version '") +
                             magic[3] + "'",
                         3);
    auto scheme_id = r.get<std::uint8_t>("scheme id");
    if (scheme_id > 7) throw ParseError("invalid scheme id", r.pos - 1);
    LabeledDataset ds;
    ds.scheme = ModulationScheme::of(static_cast<Scheme>(scheme_id));
    ds.n = r.get<std::uint16_t>("n");
    auto k = r.get<std::uint32_t>("k");
    ds.y_min = r.get<double>("y_min");
    ds.y_max = r.get<double>("y_max");
    ds.frames.resize(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        auto& f = ds.frames[i];
        f.label = r.get<std::uint16_t>("frame label");
        if (f.label < 1 || f.label > ds.scheme.alphabet_size)
            throw ParseError("frame label out of range", r.pos - 2);
        f.samples.resize(static_cast<std::size_t>(ds.n));
        for (int j = 0; j < ds.n; ++j)
            f.samples[static_cast<std::size_t>(j)] = r.get<float>("frame sample");
    }
    return ds;
}

// Text layout: "# key=value" header lines, then one "label,s1,...,sN" row
// per frame with shortest round-trip decimal reals.
inline std::string dataset_to_text(const LabeledDataset& ds) {
    std::string out;
    auto kv = [&](const std::string& key, const std::string& value) {
        out += "# " + key + "=" + value + "\n";
    };
    using detail::format_double;
    kv("scheme", std::string(scheme_name(ds.scheme.kind)));
    kv("n", std::to_string(ds.n));
    kv("k", std::to_string(ds.frames.size()));
    kv("seed", std::to_string(ds.seed));
    kv("y_min", format_double(ds.y_min));
    kv("y_max", format_double(ds.y_max));
    kv("channel_mode",
       ds.channel.mode == ChannelMode::direct_snr ? "direct_snr" : "distance");
    kv("snr_db", format_double(ds.channel.snr_db));
    kv("distance_cm", format_double(ds.channel.distance_cm));
    kv("ref_distance_cm", format_double(ds.channel.ref_distance_cm));
    kv("path_exponent", format_double(ds.channel.path_exponent));
    kv("ref_gain", format_double(ds.channel.ref_gain));
    kv("noise_sigma", format_double(ds.channel.noise_sigma));
    kv("channel_seed", std::to_string(ds.channel.seed));
    kv("signal_power", format_double(ds.signal_power));
    for (const auto& f : ds.frames) {
        out += std::to_string(f.label);
        for (double s : f.samples) {
            out += ',';
            out += format_double(s);
        }
        out += '\n';
    }
    return out;
}

inline LabeledDataset dataset_from_text(std::string_view text) {
    LabeledDataset ds;
    bool have_scheme = false;
    std::size_t pos = 0;
    std::size_t row = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        std::size_t line_off = pos;
        pos = eol + 1;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t start = line.find_first_not_of("# ");
            if (start == std::string_view::npos) continue;
            std::size_t eq = line.find('=', start);
            if (eq == std::string_view::npos)
                throw ParseError("header line without '='", line_off);
            std::string_view key = line.substr(start, eq - start);
            std::string_view val = line.substr(eq + 1);
            std::size_t voff = line_off + eq + 1;
            using detail::parse_double;
            using detail::parse_int;
            using detail::parse_uint64;
            if (key == "scheme") {
                ds.scheme = scheme_from_name(val);
                have_scheme = true;
            } else if (key == "n") {
                ds.n = static_cast<int>(parse_int(val, voff, "n"));
            } else if (key == "k") {
                ds.frames.reserve(
                    static_cast<std::size_t>(parse_int(val, voff, "k")));
            } else if (key == "seed") {
                ds.seed = parse_uint64(val, voff, "seed");
            } else if (key == "y_min") {
                ds.y_min = parse_double(val, voff, "y_min");
            } else if (key == "y_max") {
                ds.y_max = parse_double(val, voff, "y_max");
            } else if (key == "channel_mode") {
                ds.channel.mode = val == "distance" ? ChannelMode::distance
                                                    : ChannelMode::direct_snr;
            } else if (key == "snr_db") {
                ds.channel.snr_db = parse_double(val, voff, "snr_db");
            } else if (key == "distance_cm") {
                ds.channel.distance_cm = parse_double(val, voff, "distance_cm");
            } else if (key == "ref_distance_cm") {
                ds.channel.ref_distance_cm =
                    parse_double(val, voff, "ref_distance_cm");
            } else if (key == "path_exponent") {
                ds.channel.path_exponent =
                    parse_double(val, voff, "path_exponent");
            } else if (key == "ref_gain") {
                ds.channel.ref_gain = parse_double(val, voff, "ref_gain");
            } else if (key == "noise_sigma") {
                ds.channel.noise_sigma = parse_double(val, voff, "noise_sigma");
            } else if (key == "channel_seed") {
                ds.channel.seed = parse_uint64(val, voff, "channel_seed");
            } else if (key == "signal_power") {
                ds.signal_power = parse_double(val, voff, "signal_power");
            }
            // unknown keys are ignored for forward compatibility
            continue;
        }
        if (!have_scheme)
            throw ParseError("data row before scheme header", line_off);
        WaveformFrame f;
        std::size_t field_start = 0;
        int field = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i != line.size() && line[i] != ',') continue;
            std::string_view tok = line.substr(field_start, i - field_start);
            std::size_t toff = line_off + field_start;
            if (field == 0) {
                f.label = static_cast<int>(detail::parse_int(tok, toff, "label"));
            } else {
                f.samples.push_back(detail::parse_double(tok, toff, "sample"));
            }
            ++field;
            field_start = i + 1;
        }
        if (static_cast<int>(f.samples.size()) != ds.n)
            throw ParseError("row " + std::to_string(row) + " has " +
                                 std::to_string(f.samples.size()) +
                                 " samples, expected " + std::to_string(ds.n),
                             line_off);
        if (f.label < 1 || f.label > ds.scheme.alphabet_size)
            throw ParseError("frame label out of range", line_off);
        ds.frames.push_back(std::move(f));
        ++row;
    }
    return ds;
}

enum class DatasetFormat : std::uint8_t { binary = 0, text = 1 };

inline void save(const LabeledDataset& ds, const std::string& path,
                 DatasetFormat fmt = DatasetFormat::binary) {
    detail::write_file(path, fmt == DatasetFormat::binary ? dataset_to_binary(ds)
                                                          : dataset_to_text(ds));
}

// Sniffs the format: binary files start with the OWD magic.
inline LabeledDataset load(const std::string& path) {
    std::string data = detail::read_file(path);
    if (data.size() >= 3 && std::memcmp(data.data(), "OWD", 3) == 0)
        return dataset_from_binary(std::span<const char>(data));
    return dataset_from_text(data);
}

}  // namespace owd
