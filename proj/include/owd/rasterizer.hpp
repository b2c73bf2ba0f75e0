#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "owd/common.hpp"
#include "owd/modulation.hpp"

namespace owd {

struct GrayImage {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    GrayImage() = default;
    GrayImage(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const {
        return v[static_cast<std::size_t>(r) * cols + c];
    }
    double& a_row(int r) { return v[static_cast<std::size_t>(r) * cols]; }
    const double& a_row(int r) const {
        return v[static_cast<std::size_t>(r) * cols];
    }
};

struct BinaryImage {
    static constexpr int side = 28;
    std::array<std::uint8_t, side * side> px{};

    std::uint8_t& at(int r, int c) { return px[static_cast<std::size_t>(r) * side + c]; }
    std::uint8_t at(int r, int c) const {
        return px[static_cast<std::size_t>(r) * side + c];
    }
    int foreground_count() const {
        int n = 0;
        for (auto p : px) n += p;
        return n;
    }
};

struct Point {
    double x = 0.0;  // sample index, 1..N
    double y = 0.0;  // normalized amplitude, 0..1
};

inline std::vector<Point> frame_to_points(const WaveformFrame& frame) {
    std::vector<Point> pts;
    pts.reserve(frame.samples.size());
    for (std::size_t i = 0; i < frame.samples.size(); ++i)
        pts.push_back({static_cast<double>(i + 1), frame.samples[i]});
    return pts;
}

namespace detail {

// One unit-axis step per iteration, so the drawn path is 4-connected.
// Ties (e2 == dy boundary) step along the column axis.
inline void draw_segment_4conn(GrayImage& img, int r0, int c0, int r1, int c1) {
    int dc = std::abs(c1 - c0), sc = c0 < c1 ? 1 : -1;
    int dr = -std::abs(r1 - r0), sr = r0 < r1 ? 1 : -1;
    int err = dc + dr;
    for (;;) {
        img.at(r0, c0) = 1.0;
        int e2 = 2 * err;
        if (e2 >= dr) {
            if (c0 == c1) break;
            err += dr;
            c0 += sc;
        } else if (e2 <= dc) {
            if (r0 == r1) break;
            err += dc;
            r0 += sr;
        }
    }
}

}  // namespace detail

// Polyline drawing of the points on a square canvas: x in [1,N] maps
// affinely to columns, y in [0,1] to rows with row 0 at y=1 (top).
// Continuous coordinates round half away from zero (std::lround).
inline GrayImage rasterize(const std::vector<Point>& points, int canvas_px) {
    if (canvas_px < BinaryImage::side || canvas_px % BinaryImage::side != 0)
        throw Error("canvas must be a positive multiple of 28");
    if (points.empty()) throw Error("no points to rasterize");

    GrayImage img(canvas_px, canvas_px);
    double n = static_cast<double>(points.size());
    auto to_col = [&](double x) {
        double t = n > 1.0 ? (x - 1.0) / (n - 1.0) : 0.0;
        return static_cast<int>(std::lround(t * (canvas_px - 1)));
    };
    auto to_row = [&](double y) {
        double t = std::clamp(y, 0.0, 1.0);
        return static_cast<int>(std::lround((1.0 - t) * (canvas_px - 1)));
    };

    int pr = to_row(points[0].y), pc = to_col(points[0].x);
    img.at(pr, pc) = 1.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        int r = to_row(points[i].y), c = to_col(points[i].x);
        detail::draw_segment_4conn(img, pr, pc, r, c);
        pr = r;
        pc = c;
    }
    return img;
}

namespace detail {

// Keys cubic, a = -0.5.
inline double bicubic_weight(double t) {
    t = std::abs(t);
    if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
    if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
    return 0.0;
}

}  // namespace detail

// Separable bicubic resample to 28x28; output clamped to [0,1]. Pixel
// centers align: source u = (o + 0.5) * scale - 0.5. When shrinking, the
// kernel is stretched by the scale factor and renormalized (the standard
// anti-aliased resize; a plain 4-tap kernel would drop 1-px polylines
// between taps at 10x decimation). Edge taps replicate the border pixel.
inline GrayImage downsample_bicubic(const GrayImage& gray) {
    constexpr int out_side = BinaryImage::side;
    if (gray.rows != gray.cols) throw Error("bicubic input must be square");
    if (gray.rows < out_side || gray.rows % out_side != 0)
        throw Error("bicubic input side must be a positive multiple of 28");

    int in_side = gray.rows;
    double scale = static_cast<double>(in_side) / out_side;

    struct TapSet {
        int lo = 0;
        std::vector<double> w;
    };
    std::vector<TapSet> taps(out_side);
    for (int o = 0; o < out_side; ++o) {
        double u = (o + 0.5) * scale - 0.5;
        int lo = static_cast<int>(std::ceil(u - 2.0 * scale));
        int hi = static_cast<int>(std::floor(u + 2.0 * scale));
        auto& t = taps[static_cast<std::size_t>(o)];
        t.lo = lo;
        t.w.resize(static_cast<std::size_t>(hi - lo + 1));
        double sum = 0.0;
        for (int i = lo; i <= hi; ++i) {
            double w = detail::bicubic_weight((u - i) / scale);
            t.w[static_cast<std::size_t>(i - lo)] = w;
            sum += w;
        }
        for (auto& w : t.w) w /= sum;
    }
    auto tap_index = [&](const TapSet& t, std::size_t k) {
        return std::clamp(t.lo + static_cast<int>(k), 0, in_side - 1);
    };

    GrayImage rows_done(out_side, in_side);
    for (int r = 0; r < out_side; ++r) {
        const auto& t = taps[static_cast<std::size_t>(r)];
        for (std::size_t k = 0; k < t.w.size(); ++k) {
            const double w = t.w[k];
            if (w == 0.0) continue;
            const double* src = &gray.a_row(tap_index(t, k));
            double* dst = &rows_done.a_row(r);
            for (int c = 0; c < in_side; ++c) dst[c] += w * src[c];
        }
    }
    GrayImage out(out_side, out_side);
    for (int r = 0; r < out_side; ++r) {
        for (int c = 0; c < out_side; ++c) {
            const auto& t = taps[static_cast<std::size_t>(c)];
            double acc = 0.0;
            for (std::size_t k = 0; k < t.w.size(); ++k)
                acc += t.w[k] * rows_done.at(r, tap_index(t, k));
            out.at(r, c) = std::clamp(acc, 0.0, 1.0);
        }
    }
    return out;
}

// Otsu's threshold over a 256-bin histogram of [0,1] values, reported as
// the midpoint between the two classes' nearest values so that
// "value > threshold" reproduces the histogram split exactly.
// Degenerate (single-bin) images threshold at the maximum, i.e. nothing
// is foreground.
inline double otsu_threshold(const GrayImage& gray) {
    constexpr int bins = 256;
    std::array<double, bins> hist{};
    for (double v : gray.v) {
        int b = std::clamp(static_cast<int>(v * bins), 0, bins - 1);
        hist[static_cast<std::size_t>(b)] += 1.0;
    }
    double total = static_cast<double>(gray.v.size());
    double total_mean = 0.0;
    for (int b = 0; b < bins; ++b) hist[static_cast<std::size_t>(b)] /= total;
    for (int b = 0; b < bins; ++b) total_mean += b * hist[static_cast<std::size_t>(b)];

    int best_bin = bins - 1;
    double best_var = 0.0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < bins - 1; ++t) {
        w0 += hist[static_cast<std::size_t>(t)];
        sum0 += t * hist[static_cast<std::size_t>(t)];
        double w1 = 1.0 - w0;
        if (w0 <= 0.0 || w1 <= 0.0) continue;
        double mu0 = sum0 / w0;
        double mu1 = (total_mean - sum0) / w1;
        double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_bin = t;
        }
    }

    double lo_max = -1.0, hi_min = 2.0, all_max = 0.0;
    for (double v : gray.v) {
        int b = std::clamp(static_cast<int>(v * bins), 0, bins - 1);
        if (b <= best_bin)
            lo_max = std::max(lo_max, v);
        else
            hi_min = std::min(hi_min, v);
        all_max = std::max(all_max, v);
    }
    if (hi_min > 1.5) return all_max;  // no foreground class
    return 0.5 * (lo_max + hi_min);
}

inline BinaryImage binarize_global(const GrayImage& gray28) {
    if (gray28.rows != BinaryImage::side || gray28.cols != BinaryImage::side)
        throw Error("binarize expects a 28x28 image");
    double t = otsu_threshold(gray28);
    BinaryImage out;
    for (int r = 0; r < BinaryImage::side; ++r)
        for (int c = 0; c < BinaryImage::side; ++c)
            out.at(r, c) = gray28.at(r, c) > t ? 1 : 0;
    return out;
}

inline constexpr int default_canvas_px = 280;

// The full visualization block: frame -> points -> polyline canvas ->
// bicubic 28x28 -> global threshold.
inline BinaryImage visualize(const WaveformFrame& frame,
                             int canvas_px = default_canvas_px) {
    return binarize_global(
        downsample_bicubic(rasterize(frame_to_points(frame), canvas_px)));
}

inline void write_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
    for (double v : img.v) {
        auto b = static_cast<unsigned char>(
            std::clamp(255.0 * (1.0 - v), 0.0, 255.0));
        out.put(static_cast<char>(b));
    }
    if (!out) throw Error("write failed: " + path);
}

inline void write_pgm(const BinaryImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << "P5\n" << BinaryImage::side << " " << BinaryImage::side << "\n255\n";
    for (auto p : img.px) out.put(static_cast<char>(p ? 0 : 255));
    if (!out) throw Error("write failed: " + path);
}

}  // namespace owd
