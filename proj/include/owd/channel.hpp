#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "owd/common.hpp"
#include "owd/modulation.hpp"

namespace owd {

enum class ChannelMode : std::uint8_t {
    direct_snr = 0,  // unit gain, sigma resolved from a target SNR
    distance = 1,    // LOS power-law gain, fixed sigma
};

// y = g x + n, n ~ N(0, sigma^2) i.i.d. per sample, receiver-referred.
struct ChannelConfig {
    ChannelMode mode = ChannelMode::direct_snr;
    double snr_db = 30.0;

    double distance_cm = 100.0;
    double ref_distance_cm = 10.0;
    double path_exponent = 2.0;
    double ref_gain = 1.0;

    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    bool clip_negative = false;
};

inline double channel_gain(const ChannelConfig& cfg) {
    if (cfg.mode == ChannelMode::direct_snr) return 1.0;
    if (cfg.distance_cm <= 0.0 || cfg.ref_distance_cm <= 0.0)
        throw Error("distance must be positive");
    return cfg.ref_gain *
           std::pow(cfg.ref_distance_cm / cfg.distance_cm, cfg.path_exponent);
}

// In direct_snr mode, fixes noise_sigma so that
// 10 log10(g^2 P / sigma^2) == snr_db for the given clean-signal power P
// (mean squared sample, pre-gain). Distance mode keeps its configured sigma.
inline ChannelConfig resolve_noise_sigma(ChannelConfig cfg,
                                         double reference_power) {
    if (cfg.mode == ChannelMode::direct_snr) {
        if (reference_power < 0.0) throw Error("reference power must be >= 0");
        double g = channel_gain(cfg);
        cfg.noise_sigma = g * std::sqrt(reference_power) *
                          std::pow(10.0, -cfg.snr_db / 20.0);
    }
    return cfg;
}

// SNR in dB for a channel at the given clean-signal power (pre-gain mean
// squared sample). sigma == 0 reports infinity.
inline double snr_for_config(const ChannelConfig& cfg,
                             double reference_frame_power) {
    double g = channel_gain(cfg);
    if (cfg.noise_sigma == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(g * g * reference_frame_power /
                             (cfg.noise_sigma * cfg.noise_sigma));
}

// frame_index selects an independent noise sub-stream so a frame's noise
// does not depend on how the stream was batched or ordered.
inline WaveformFrame apply_channel(const WaveformFrame& frame,
                                   const ChannelConfig& cfg,
                                   std::uint64_t frame_index = 0) {
    double g = channel_gain(cfg);
    WaveformFrame out;
    out.label = frame.label;
    out.samples.resize(frame.samples.size());
    if (cfg.noise_sigma == 0.0) {
        for (std::size_t i = 0; i < frame.samples.size(); ++i)
            out.samples[i] = g * frame.samples[i];
    } else {
        Rng rng(derive_seed(cfg.seed, frame_index));
        for (std::size_t i = 0; i < frame.samples.size(); ++i)
            out.samples[i] = g * frame.samples[i] + cfg.noise_sigma * rng.normal();
    }
    if (cfg.clip_negative)
        for (auto& s : out.samples) s = std::max(s, 0.0);
    return out;
}

inline std::vector<WaveformFrame> apply_channel(
    const std::vector<WaveformFrame>& frames, const ChannelConfig& cfg,
    std::uint64_t first_frame_index = 0) {
    std::vector<WaveformFrame> out(frames.size());
    parallel_for(frames.size(), [&](std::size_t i) {
        out[i] = apply_channel(frames[i], cfg, first_frame_index + i);
    });
    return out;
}

}  // namespace owd
