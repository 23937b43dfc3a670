#pragma once

#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>

#include "color.hpp"
#include "core.hpp"
#include "image.hpp"

namespace lectureseg {

struct FilterConfig {
    int laplacian_threshold = 24;
    int similarity_run = 8;
    int similarity_diff = 4;
    double min_region_frac = 0.01;
    double blob_area = 500.0;             // at the reference frame area below
    double blob_reference_area = 307200.0;  // 640 x 480
    bool blob_filter = true;
    PixelPredicates predicates;

    std::size_t blob_limit(int width, int height) const {
        return static_cast<std::size_t>(std::lround(blob_area * (double(width) * height) / blob_reference_area));
    }
};

/// Intermediate masks keyed by stage letter: b..e background, f..i foreground,
/// j merged, k after the blob filter.
using FilterDebugBundle = std::map<char, BinaryRaster>;

/// 3x3 Laplacian (centre 8, neighbours -1) on luma, thresholded on |response|.
inline BinaryRaster laplacian_edges(const Raster& frame, int threshold = 24) {
    const int w = frame.width(), h = frame.height();
    const auto y = luma_plane(frame);
    BinaryRaster out(w, h);
    for (int r = 1; r + 1 < h; ++r)
        for (int c = 1; c + 1 < w; ++c) {
            int sum = 0;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) sum += y[(r + dr) * w + (c + dc)];
            const int resp = 9 * y[r * w + c] - sum;
            if (std::abs(resp) >= threshold) out.set(c, r);
        }
    return out;
}

namespace detail {

inline bool close_colour(Rgb a, Rgb b, int diff) {
    return std::abs(a.r - b.r) <= diff && std::abs(a.g - b.g) <= diff && std::abs(a.b - b.b) <= diff;
}

// Run of `len` pixels starting next to (x, y) in direction (dx, dy), all
// within `diff` of each other per channel.
inline bool homogeneous_run(const Raster& img, int x, int y, int dx, int dy, int len, int diff) {
    const int ex = x + dx * len, ey = y + dy * len;
    if (!img.contains(ex, ey)) return false;
    int lo[3] = {255, 255, 255}, hi[3] = {0, 0, 0};
    for (int k = 1; k <= len; ++k) {
        const Rgb p = img.at(x + dx * k, y + dy * k);
        const int ch[3] = {p.r, p.g, p.b};
        for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], ch[c]);
            hi[c] = std::max(hi[c], ch[c]);
            if (hi[c] - lo[c] > diff) return false;
        }
    }
    return true;
}

}  // namespace detail

/// Drops edge pixels that separate two large homogeneous regions of different colour.
inline BinaryRaster suppress_region_borders(const BinaryRaster& edges, const Raster& frame, int run = 8,
                                            int diff = 4) {
    BinaryRaster out = edges;
    for (int y = 0; y < edges.height(); ++y)
        for (int x = 0; x < edges.width(); ++x) {
            if (!edges.at(x, y)) continue;
            auto separates = [&](int dx, int dy) {
                return detail::homogeneous_run(frame, x, y, -dx, -dy, run, diff) &&
                       detail::homogeneous_run(frame, x, y, dx, dy, run, diff) &&
                       !detail::close_colour(frame.at(x - dx, y - dy), frame.at(x + dx, y + dy), diff);
            };
            if (separates(1, 0) || separates(0, 1)) out.set(x, y, false);
        }
    return out;
}

inline BinaryRaster colour_mask(const Raster& frame, MediaType media, const PixelPredicates& pred) {
    BinaryRaster mask(frame.width(), frame.height());
    for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x) {
            const Rgb p = frame.at(x, y);
            mask.set(x, y, media == MediaType::Board ? pred.green(p) : pred.white(p));
        }
    return mask;
}

namespace detail {

inline void require_board_or_sheet(MediaType media) {
    if (media != MediaType::Board && media != MediaType::Sheet)
        throw std::invalid_argument("content filter needs a Board or Sheet frame");
}

inline BinaryRaster background_from(const Raster& frame, MediaType media, const BinaryRaster& edges,
                                    const FilterConfig& cfg, FilterDebugBundle* debug) {
    const int w = frame.width(), h = frame.height();
    BinaryRaster candidates = colour_mask(frame, media, cfg.predicates);
    if (debug) (*debug)['b'] = candidates;

    BinaryRaster open(w, h);
    for (std::size_t i = 0; i < open.size(); ++i)
        open.data()[i] = candidates.data()[i] && !edges.data()[i];
    const Components cc = connected_components(open, 4);
    BinaryRaster flooded(w, h);
    if (!cc.area.empty()) {
        const auto largest = std::max_element(cc.area.begin(), cc.area.end()) - cc.area.begin();
        if (double(cc.area[largest]) >= cfg.min_region_frac * w * h)
            for (std::size_t i = 0; i < flooded.size(); ++i) flooded.data()[i] = cc.label[i] == largest;
    }
    if (debug) {
        (*debug)['c'] = flooded;
        (*debug)['d'] = outline(flooded);
    }
    BinaryRaster filled = flooded.count() ? fill_holes(flooded) : flooded;
    if (debug) (*debug)['e'] = filled;
    return filled;
}

}  // namespace detail

/// Board or sheet support mask: colour filter, edge-bounded flood of the
/// largest region, then its outline filled so writing holes are absorbed.
inline BinaryRaster extract_background(const Raster& frame, MediaType media, const FilterConfig& cfg = {},
                                       FilterDebugBundle* debug = nullptr) {
    detail::require_board_or_sheet(media);
    return detail::background_from(frame, media, laplacian_edges(frame, cfg.laplacian_threshold), cfg, debug);
}

/// Removes edge pixels with fewer than two set 8-neighbours.
inline BinaryRaster remove_isolated(const BinaryRaster& in) {
    BinaryRaster out = in;
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x) {
            if (!in.at(x, y)) continue;
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if ((dx || dy) && in.get_or(x + dx, y + dy, false)) ++n;
            if (n < 2) out.set(x, y, false);
        }
    return out;
}

/// Deletes 8-connected components with area above `limit`.
inline BinaryRaster remove_large_blobs(const BinaryRaster& in, std::size_t limit) {
    const Components cc = connected_components(in, 8);
    BinaryRaster out = in;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (cc.label[i] >= 0 && cc.area[cc.label[i]] > limit) out.data()[i] = 0;
    return out;
}

/// Derived content frame: binary mask of the writing on a board or sheet.
inline BinaryRaster derive_content(const Raster& frame, MediaType media, const FilterConfig& cfg = {},
                                   FilterDebugBundle* debug = nullptr) {
    detail::require_board_or_sheet(media);
    const BinaryRaster edges = laplacian_edges(frame, cfg.laplacian_threshold);
    const BinaryRaster background = detail::background_from(frame, media, edges, cfg, debug);
    if (debug) (*debug)['f'] = edges;

    BinaryRaster foreground;
    if (media == MediaType::Board) {
        BinaryRaster g = suppress_region_borders(edges, frame, cfg.similarity_run, cfg.similarity_diff);
        BinaryRaster h = remove_isolated(g);
        foreground = close3x3(h);
        if (debug) {
            (*debug)['g'] = g;
            (*debug)['h'] = h;
            (*debug)['i'] = foreground;
        }
    } else {
        // ink on paper is high contrast; edges go straight to the merge
        foreground = edges;
    }
    BinaryRaster merged = mask_and(foreground, background);
    if (debug) (*debug)['j'] = merged;
    BinaryRaster result = cfg.blob_filter ? remove_large_blobs(merged, cfg.blob_limit(frame.width(), frame.height()))
                                          : merged;
    if (debug) (*debug)['k'] = result;
    return result;
}

}  // namespace lectureseg
