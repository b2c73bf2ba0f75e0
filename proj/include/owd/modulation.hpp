#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "owd/common.hpp"

namespace owd {

enum class Scheme : std::uint8_t {
    ook = 0,
    qpsk = 1,
    ppm4 = 2,
    qam16 = 3,
    qam32 = 4,
    qam64 = 5,
    qam128 = 6,
    qam256 = 7,
};

struct ModulationScheme {
    Scheme kind = Scheme::ook;
    int alphabet_size = 2;
    double bits_per_symbol = 1.0;

    static ModulationScheme of(Scheme k) {
        int m = 0;
        switch (k) {
            case Scheme::ook: m = 2; break;
            case Scheme::qpsk: m = 4; break;
            case Scheme::ppm4: m = 4; break;
            case Scheme::qam16: m = 16; break;
            case Scheme::qam32: m = 32; break;
            case Scheme::qam64: m = 64; break;
            case Scheme::qam128: m = 128; break;
            case Scheme::qam256: m = 256; break;
        }
        return ModulationScheme{k, m, std::log2(static_cast<double>(m))};
    }
};

inline std::string_view scheme_name(Scheme k) {
    switch (k) {
        case Scheme::ook: return "ook";
        case Scheme::qpsk: return "qpsk";
        case Scheme::ppm4: return "ppm4";
        case Scheme::qam16: return "qam16";
        case Scheme::qam32: return "qam32";
        case Scheme::qam64: return "qam64";
        case Scheme::qam128: return "qam128";
        case Scheme::qam256: return "qam256";
    }
    return "?";
}

inline ModulationScheme scheme_from_name(std::string_view name) {
    for (int k = 0; k <= 7; ++k) {
        auto s = static_cast<Scheme>(k);
        if (scheme_name(s) == name) return ModulationScheme::of(s);
    }
    throw Error("unknown modulation scheme: " + std::string(name));
}

inline constexpr std::array<Scheme, 8> all_schemes = {
    Scheme::ook,  Scheme::qpsk,  Scheme::ppm4,   Scheme::qam16,
    Scheme::qam32, Scheme::qam64, Scheme::qam128, Scheme::qam256};

// QPSK and the QAM family ride a carrier; OOK and 4-PPM are baseband
// rectangular pulses.
inline bool is_carrier_scheme(Scheme k) {
    return k != Scheme::ook && k != Scheme::ppm4;
}

// Samples per period used by the reference sweeps (Table-style sizes);
// 4-PPM uses the power-of-two set so chips stay whole.
inline std::array<int, 4> canonical_n_values(Scheme k) {
    if (k == Scheme::ppm4) return {8, 16, 32, 64};
    return {10, 20, 40, 80};
}

struct WaveformFrame {
    std::vector<double> samples;
    int label = 0;  // in {1, ..., M}

    int n() const { return static_cast<int>(samples.size()); }
};

struct CarrierConfig {
    int cycles_per_period = 2;
    // Empty means the auto rule: bias by the constellation's maximum
    // envelope for carrier schemes (so every sample is >= 0), zero for
    // the already non-negative baseband schemes.
    std::optional<double> dc_bias{};
};

namespace detail {

inline unsigned gray_decode(unsigned g) {
    unsigned b = g;
    while (g >>= 1u) b ^= g;
    return b;
}

// Square grids (QPSK as 4-QAM, 16/64/256-QAM): Gray-coded per axis, odd
// integer levels. Cross grids (32/128-QAM): the rectangle with the corner
// blocks removed, enumerated in a fixed row-major order.
inline std::vector<std::complex<double>> raw_constellation(Scheme k) {
    std::vector<std::complex<double>> pts;
    auto square = [&](int side) {
        int half_bits = 0;
        while ((1 << half_bits) < side) ++half_bits;
        pts.reserve(static_cast<std::size_t>(side) * side);
        for (int code = 0; code < side * side; ++code) {
            unsigned ci = static_cast<unsigned>(code) >> half_bits;
            unsigned cq = static_cast<unsigned>(code) & ((1u << half_bits) - 1u);
            int pi = static_cast<int>(gray_decode(ci));
            int pq = static_cast<int>(gray_decode(cq));
            pts.emplace_back(2 * pi - (side - 1), 2 * pq - (side - 1));
        }
    };
    auto cross = [&](int side, int corner) {
        for (int pi = 0; pi < side; ++pi) {
            for (int pq = 0; pq < side; ++pq) {
                int li = 2 * pi - (side - 1);
                int lq = 2 * pq - (side - 1);
                int cut = side - 1 - 2 * corner;
                if (std::abs(li) > cut && std::abs(lq) > cut) continue;
                pts.emplace_back(li, lq);
            }
        }
    };
    switch (k) {
        case Scheme::qpsk: square(2); break;
        case Scheme::qam16: square(4); break;
        case Scheme::qam64: square(8); break;
        case Scheme::qam256: square(16); break;
        case Scheme::qam32: cross(6, 1); break;
        case Scheme::qam128: cross(12, 2); break;
        default: throw Error("no constellation for baseband scheme");
    }
    return pts;
}

}  // namespace detail

// Constellation point for symbol_index in {1..M}, scaled so the maximum
// envelope over the alphabet is exactly 1.
inline std::complex<double> constellation_point(Scheme k, int symbol_index) {
    static const std::array<std::vector<std::complex<double>>, 8> tables = [] {
        std::array<std::vector<std::complex<double>>, 8> t;
        for (Scheme s : all_schemes) {
            if (!is_carrier_scheme(s)) continue;
            auto pts = detail::raw_constellation(s);
            double max_env = 0.0;
            for (auto p : pts) max_env = std::max(max_env, std::abs(p));
            for (auto& p : pts) p /= max_env;
            t[static_cast<std::size_t>(s)] = std::move(pts);
        }
        return t;
    }();
    const auto& tab = tables[static_cast<std::size_t>(k)];
    if (tab.empty()) throw Error("no constellation for baseband scheme");
    if (symbol_index < 1 || symbol_index > static_cast<int>(tab.size()))
        throw Error("symbol index out of range");
    return tab[static_cast<std::size_t>(symbol_index - 1)];
}

inline double auto_dc_bias(Scheme k) {
    return is_carrier_scheme(k) ? 1.0 : 0.0;
}

inline void check_frame_shape(const ModulationScheme& scheme, int n,
                              const CarrierConfig& carrier) {
    if (n < 1) throw Error("n must be positive");
    if (scheme.kind == Scheme::ppm4 && n % 4 != 0)
        throw Error("4-PPM needs n divisible by 4");
    if (is_carrier_scheme(scheme.kind)) {
        if (carrier.cycles_per_period < 1)
            throw Error("cycles_per_period must be >= 1");
        if (n < 4 * carrier.cycles_per_period)
            throw Error("need at least 4 samples per carrier cycle");
    }
    if (carrier.dc_bias && *carrier.dc_bias < 0.0)
        throw Error("dc_bias must be >= 0");
}

// One symbol period of the transmitted waveform, sampled at n uniform
// instants t = (i/n)T, i = 0..n-1. Carrier schemes emit
// Re[s e^{j 2 pi fc t}] + bias with fc T = cycles_per_period.
inline WaveformFrame symbol_to_frame(const ModulationScheme& scheme,
                                     int symbol_index, int n,
                                     const CarrierConfig& carrier = {}) {
    check_frame_shape(scheme, n, carrier);
    if (symbol_index < 1 || symbol_index > scheme.alphabet_size)
        throw Error("symbol index out of range");

    double bias = carrier.dc_bias ? *carrier.dc_bias : auto_dc_bias(scheme.kind);
    WaveformFrame f;
    f.label = symbol_index;
    f.samples.assign(static_cast<std::size_t>(n), bias);

    switch (scheme.kind) {
        case Scheme::ook: {
            if (symbol_index == 2)
                for (auto& s : f.samples) s += 1.0;
            break;
        }
        case Scheme::ppm4: {
            int chip = n / 4;
            int lo = (symbol_index - 1) * chip;
            for (int i = lo; i < lo + chip; ++i)
                f.samples[static_cast<std::size_t>(i)] += 1.0;
            break;
        }
        default: {
            auto s = constellation_point(scheme.kind, symbol_index);
            double w = 2.0 * M_PI * carrier.cycles_per_period / n;
            for (int i = 0; i < n; ++i)
                f.samples[static_cast<std::size_t>(i)] +=
                    s.real() * std::cos(w * i) - s.imag() * std::sin(w * i);
            // Auto bias promises min sample == 0; rounding of the unit
            // envelope can leave -1e-16 dust below it.
            if (!carrier.dc_bias)
                for (auto& v : f.samples) v = std::max(v, 0.0);
            break;
        }
    }
    return f;
}

// Uniform i.i.d. symbols in {1..M}, reproducible per seed.
inline std::vector<int> random_symbol_stream(const ModulationScheme& scheme,
                                             int count, std::uint64_t seed) {
    if (count < 0) throw Error("count must be >= 0");
    Rng rng(seed);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.push_back(1 + static_cast<int>(rng.below(
                              static_cast<std::uint32_t>(scheme.alphabet_size))));
    return out;
}

inline std::vector<WaveformFrame> modulate_stream(
    const ModulationScheme& scheme, std::span<const int> symbols, int n,
    const CarrierConfig& carrier = {}) {
    std::vector<WaveformFrame> out;
    out.reserve(symbols.size());
    for (int s : symbols) out.push_back(symbol_to_frame(scheme, s, n, carrier));
    return out;
}

}  // namespace owd
