#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "color.hpp"
#include "content_filter.hpp"
#include "core.hpp"
#include "image.hpp"

namespace lectureseg {

/// Per-side fractions, ordered left, right, top, bottom.
struct SideFractions {
    double left = 0, right = 0, top = 0, bottom = 0;

    friend bool operator==(const SideFractions&, const SideFractions&) = default;
};

struct FeatureVector {
    double mean_luma = 0;
    SideFractions border_black;
    double green_frac = 0;
    double green_bottom_frac = 0;
    SideFractions green_border_fracs;
    double white_frac = 0;
    double light_frac = 0;
    double hlm = 0;
    double crm = 0;
    double dark_area_frac = 0;
};

struct ClassifierConfig {
    PixelPredicates predicates;
    double border_band = 0.05;
    int black_luma_max = 40;
    double green_band = 0.10;
    int dark_luma_max = 40;
    int laplacian_threshold = 24;
    int repeat_run = 32;
    int repeat_diff = 2;

    double bb = 0.8;
    double dark = 50;
    double green = 0.40;
    double green_bottom = 0.05;
    double green_bottom_board = 0.20;
    double green_border = 0.50;
    double green_residual = 0.20;
    double white = 0.45;
    double hlm = 4.0;
    double light = 0.60;
    double crm = 0.15;
    double fade = 0.50;
    double hist = 0.60;
    int tail_limit = 10;
};

/// Fraction of pixels per border band whose luma is below `luma_max`.
inline SideFractions black_border_fraction(const Raster& frame, double band_frac, int luma_max) {
    const int w = frame.width(), h = frame.height();
    const int bw = std::max(1, static_cast<int>(std::lround(band_frac * w)));
    const int bh = std::max(1, static_cast<int>(std::lround(band_frac * h)));
    auto frac = [&](int x0, int y0, int x1, int y1) {
        long n = 0, dark = 0;
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) {
                ++n;
                dark += luma(frame.at(x, y)) < luma_max;
            }
        return n ? double(dark) / n : 0.0;
    };
    return {frac(0, 0, bw, h), frac(w - bw, 0, w, h), frac(0, 0, w, bh), frac(0, h - bh, w, h)};
}

/// Horizontal-line measure: maximal horizontal edge runs of length L >= width/16
/// contribute 2^(L / (width/16)); the sum is divided by the height.
inline double horizontal_line_measure(const BinaryRaster& edges) {
    const double l0 = edges.width() / 16.0;
    double sum = 0;
    for (int y = 0; y < edges.height(); ++y) {
        int run = 0;
        for (int x = 0; x <= edges.width(); ++x) {
            if (x < edges.width() && edges.at(x, y)) {
                ++run;
                continue;
            }
            if (run > 0 && run >= l0) sum += std::exp2(run / l0);
            run = 0;
        }
    }
    return sum / edges.height();
}

/// Fraction of pixels lying in a horizontal or vertical run (>= run_len) of
/// neighbours whose channels differ by at most `diff`.
inline double color_repetition_measure(const Raster& frame, int run_len = 32, int diff = 2) {
    const int w = frame.width(), h = frame.height();
    std::vector<std::uint8_t> covered(frame.size(), 0);
    auto scan = [&](int count, int length, auto pixel_at, auto index_of) {
        for (int line = 0; line < count; ++line) {
            int start = 0;
            for (int k = 1; k <= length; ++k) {
                const bool cont = k < length && detail::close_colour(pixel_at(line, k - 1), pixel_at(line, k), diff);
                if (cont) continue;
                if (k - start >= run_len)
                    for (int m = start; m < k; ++m) covered[index_of(line, m)] = 1;
                start = k;
            }
        }
    };
    scan(h, w, [&](int y, int x) { return frame.at(x, y); }, [&](int y, int x) { return y * w + x; });
    scan(w, h, [&](int x, int y) { return frame.at(x, y); }, [&](int x, int y) { return y * w + x; });
    long n = 0;
    for (auto c : covered) n += c;
    return double(n) / frame.size();
}

inline FeatureVector compute_features(const Raster& frame, const ClassifierConfig& cfg = {}) {
    const int w = frame.width(), h = frame.height();
    const auto& pred = cfg.predicates;
    FeatureVector fv;
    fv.border_black = black_border_fraction(frame, cfg.border_band, cfg.black_luma_max);

    const int gbw = std::max(1, static_cast<int>(std::lround(cfg.green_band * w)));
    const int gbh = std::max(1, static_cast<int>(std::lround(cfg.green_band * h)));
    long luma_sum = 0, green = 0, white = 0, light = 0, dark = 0;
    long g_left = 0, g_right = 0, g_top = 0, g_bottom = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Rgb p = frame.at(x, y);
            const int l = luma(p);
            luma_sum += l;
            dark += l < cfg.dark_luma_max;
            const bool is_white = pred.white(p);
            white += is_white;
            light += is_white || pred.light_gray(p) || PixelPredicates::skin(p);
            if (pred.green(p)) {
                ++green;
                g_left += x < gbw;
                g_right += x >= w - gbw;
                g_top += y < gbh;
                g_bottom += y >= h - gbh;
            }
        }
    const double total = double(w) * h;
    fv.mean_luma = luma_sum / total;
    fv.green_frac = green / total;
    fv.white_frac = white / total;
    fv.light_frac = light / total;
    fv.dark_area_frac = dark / total;
    fv.green_bottom_frac = double(g_bottom) / (double(gbh) * w);
    fv.green_border_fracs = {double(g_left) / (double(gbw) * h), double(g_right) / (double(gbw) * h),
                             double(g_top) / (double(gbh) * w), double(g_bottom) / (double(gbh) * w)};
    fv.hlm = horizontal_line_measure(laplacian_edges(frame, cfg.laplacian_threshold));
    fv.crm = color_repetition_measure(frame, cfg.repeat_run, cfg.repeat_diff);
    return fv;
}

namespace detail {

inline MediaType board_or_podium(const FeatureVector& fv, const ClassifierConfig& cfg) {
    if (fv.green_bottom_frac < cfg.green_bottom) return MediaType::Podium;
    const auto& gb = fv.green_border_fracs;
    const bool full_border = gb.left >= cfg.green_border && gb.right >= cfg.green_border &&
                             gb.top >= cfg.green_border && gb.bottom >= cfg.green_border;
    if (fv.green_bottom_frac >= cfg.green_bottom_board || full_border) return MediaType::Board;
    return MediaType::Podium;
}

}  // namespace detail

/// Decision tree; the first matching rule wins.
inline MediaType classify_frame(const FeatureVector& fv, const ClassifierConfig& cfg = {}) {
    const auto& bb = fv.border_black;
    if ((bb.left >= cfg.bb && bb.right >= cfg.bb) || (bb.top >= cfg.bb && bb.bottom >= cfg.bb) ||
        fv.mean_luma < cfg.dark)
        return MediaType::Computer;

    if (fv.green_frac >= cfg.green) return detail::board_or_podium(fv, cfg);

    if (fv.white_frac >= cfg.white) {
        if (fv.hlm >= cfg.hlm) return MediaType::Computer;
        if (fv.light_frac >= cfg.light) return MediaType::Sheet;
    }

    // residual: computer re-test, then board/podium with a weaker green floor
    if (fv.hlm >= cfg.hlm || fv.crm >= cfg.crm) return MediaType::Computer;
    if (fv.green_frac >= cfg.green_residual) return detail::board_or_podium(fv, cfg);
    return MediaType::Illustration;
}

/// Normalised 8x8x8 RGB histogram.
struct ColorHistogram {
    std::array<double, 512> bins{};

    static ColorHistogram of(const Raster& frame) {
        ColorHistogram hist;
        for (const Rgb& p : frame.pixels()) hist.bins[(p.r >> 5) * 64 + (p.g >> 5) * 8 + (p.b >> 5)] += 1.0;
        for (double& b : hist.bins) b /= double(frame.size());
        return hist;
    }

    double intersection(const ColorHistogram& other) const {
        double s = 0;
        for (std::size_t i = 0; i < bins.size(); ++i) s += std::min(bins[i], other.bins[i]);
        return s;
    }
};

struct ClassifiedFrame {
    MediaType type = MediaType::Unknown;
    LabelSource source = LabelSource::Visual;
    FeatureVector features;
    ColorHistogram histogram;
};

/// Evidence for one frame plus its visual class (or the filename class, if preset).
inline ClassifiedFrame classify(const Raster& frame, MediaType preset = MediaType::Unknown,
                                const ClassifierConfig& cfg = {}) {
    ClassifiedFrame c;
    c.features = compute_features(frame, cfg);
    c.histogram = ColorHistogram::of(frame);
    if (preset != MediaType::Unknown) {
        c.type = preset;
        c.source = LabelSource::Filename;
    } else {
        c.type = classify_frame(c.features, cfg);
        c.source = LabelSource::Visual;
    }
    return c;
}

/// Walks back from the last frame over the dark fade-out tail and relabels it Podium.
inline std::vector<ClassifiedFrame> postprocess_tail(std::vector<ClassifiedFrame> frames,
                                                     const ClassifierConfig& cfg = {}) {
    const int n = static_cast<int>(frames.size());
    for (int i = n - 1; i >= 0 && i >= n - cfg.tail_limit; --i) {
        auto& f = frames[i];
        if (f.features.dark_area_frac < cfg.fade) break;
        if (f.source != LabelSource::Filename && f.type != MediaType::Podium) {
            f.type = MediaType::Podium;
            f.source = LabelSource::PostProcess;
        }
    }
    return frames;
}

/// Board/Podium frames lying between Computer frames are relabelled Computer
/// when their colour histogram is close to the nearest Computer neighbour.
/// Repeats until stable, so a second application is a no-op.
inline std::vector<ClassifiedFrame> postprocess_computer_runs(std::vector<ClassifiedFrame> frames,
                                                              const ClassifierConfig& cfg = {}) {
    const int n = static_cast<int>(frames.size());
    bool changed = true;
    while (changed) {
        changed = false;
        int prev = -1;
        for (int i = 0; i < n; ++i) {
            if (frames[i].type != MediaType::Computer) continue;
            if (prev >= 0 && i - prev > 1) {
                std::vector<int> flip;
                for (int k = prev + 1; k < i; ++k) {
                    const auto& f = frames[k];
                    if (f.source == LabelSource::Filename) continue;
                    if (f.type != MediaType::Board && f.type != MediaType::Podium) continue;
                    const int dl = k - prev, dr = i - k;
                    double sim = 0;
                    if (dl <= dr) sim = std::max(sim, f.histogram.intersection(frames[prev].histogram));
                    if (dr <= dl) sim = std::max(sim, f.histogram.intersection(frames[i].histogram));
                    if (sim >= cfg.hist) flip.push_back(k);
                }
                for (int k : flip) {
                    frames[k].type = MediaType::Computer;
                    frames[k].source = LabelSource::PostProcess;
                    changed = true;
                }
            }
            prev = i;
        }
    }
    return frames;
}

}  // namespace lectureseg
