#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lectureseg {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// round(0.299R + 0.587G + 0.114B), computed exactly in integers.
inline int luma(Rgb p) {
    return (299 * p.r + 587 * p.g + 114 * p.b + 500) / 1000;
}

/// Row-major 8-bit RGB image.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, Rgb fill = {})
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0) throw std::invalid_argument("raster dimensions must be positive");
        pixels_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }
    bool empty() const { return pixels_.empty(); }

    Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    Rgb at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    const std::vector<Rgb>& pixels() const { return pixels_; }
    std::vector<Rgb>& pixels() { return pixels_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

/// Row-major binary mask; true marks a content (writing) pixel.
class BinaryRaster {
public:
    BinaryRaster() = default;
    BinaryRaster(int width, int height, bool fill = false)
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0) throw std::invalid_argument("raster dimensions must be positive");
        bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }

    bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v = true) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool get_or(int x, int y, bool outside) const { return contains(x, y) ? at(x, y) : outside; }

    std::size_t count() const {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }

    std::size_t count_in(int x0, int y0, int w, int h) const {
        std::size_t n = 0;
        for (int y = y0; y < y0 + h; ++y)
            for (int x = x0; x < x0 + w; ++x) n += at(x, y);
        return n;
    }

    const std::vector<std::uint8_t>& data() const { return bits_; }
    std::vector<std::uint8_t>& data() { return bits_; }

    friend bool operator==(const BinaryRaster&, const BinaryRaster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

inline std::vector<int> luma_plane(const Raster& img) {
    std::vector<int> out(img.size());
    const auto& px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) out[i] = luma(px[i]);
    return out;
}

inline BinaryRaster mask_and(const BinaryRaster& a, const BinaryRaster& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("mask size mismatch");
    BinaryRaster out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] & b.data()[i];
    return out;
}

namespace detail {

// out[i] = any set pixel within +-radius along one axis; outside counts as unset
inline void running_any(const std::uint8_t* in, std::uint8_t* out, int n, std::ptrdiff_t stride, int radius) {
    int ones = 0;
    for (int i = 0; i < std::min(radius, n); ++i) ones += in[i * stride];
    for (int i = 0; i < n; ++i) {
        if (i + radius < n) ones += in[(i + radius) * stride];
        if (i - radius - 1 >= 0) ones -= in[(i - radius - 1) * stride];
        out[i * stride] = ones > 0;
    }
}

inline BinaryRaster box_any(const BinaryRaster& in, int radius) {
    const int w = in.width(), h = in.height();
    BinaryRaster tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        running_any(in.data().data() + static_cast<std::size_t>(y) * w, tmp.data().data() + static_cast<std::size_t>(y) * w,
                    w, 1, radius);
    for (int x = 0; x < w; ++x) running_any(tmp.data().data() + x, out.data().data() + x, h, w, radius);
    return out;
}

inline BinaryRaster complement(const BinaryRaster& in) {
    BinaryRaster out(in.width(), in.height());
    for (std::size_t i = 0; i < in.size(); ++i) out.data()[i] = in.data()[i] ^ 1;
    return out;
}

}  // namespace detail

/// Square dilation; pixels outside the image are ignored.
inline BinaryRaster dilate(const BinaryRaster& in, int radius = 1) {
    if (radius <= 0) return in;
    return detail::box_any(in, radius);
}

/// Square erosion; pixels outside the image are ignored, so borders are not eaten.
inline BinaryRaster erode(const BinaryRaster& in, int radius = 1) {
    if (radius <= 0) return in;
    return detail::complement(detail::box_any(detail::complement(in), radius));
}

inline BinaryRaster close3x3(const BinaryRaster& in) { return erode(dilate(in, 1), 1); }

struct Components {
    std::vector<int> label;       // -1 for background
    std::vector<std::size_t> area;
};

/// Connected components of set pixels, 4- or 8-connected.
inline Components connected_components(const BinaryRaster& mask, int connectivity = 8) {
    const int w = mask.width(), h = mask.height();
    Components cc;
    cc.label.assign(mask.size(), -1);
    std::vector<int> stack;
    static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int nn = connectivity == 4 ? 4 : 8;
    for (int start = 0; start < w * h; ++start) {
        if (!mask.data()[start] || cc.label[start] >= 0) continue;
        const int id = static_cast<int>(cc.area.size());
        cc.area.push_back(0);
        cc.label[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            ++cc.area[id];
            const int px = p % w, py = p / w;
            for (int k = 0; k < nn; ++k) {
                const int qx = px + dx8[k], qy = py + dy8[k];
                if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
                const int q = qy * w + qx;
                if (mask.data()[q] && cc.label[q] < 0) {
                    cc.label[q] = id;
                    stack.push_back(q);
                }
            }
        }
    }
    return cc;
}

/// Adds every unset region that cannot reach the image border (4-connected).
inline BinaryRaster fill_holes(const BinaryRaster& region) {
    const int w = region.width(), h = region.height();
    BinaryRaster outside(w, h);
    std::vector<int> stack;
    auto seed = [&](int x, int y) {
        if (!region.at(x, y) && !outside.at(x, y)) {
            outside.set(x, y);
            stack.push_back(y * w + x);
        }
    };
    for (int x = 0; x < w; ++x) { seed(x, 0); seed(x, h - 1); }
    for (int y = 0; y < h; ++y) { seed(0, y); seed(w - 1, y); }
    while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int px = p % w, py = p / w;
        const int nx[] = {px + 1, px - 1, px, px};
        const int ny[] = {py, py, py + 1, py - 1};
        for (int k = 0; k < 4; ++k)
            if (region.contains(nx[k], ny[k])) seed(nx[k], ny[k]);
    }
    BinaryRaster out(w, h);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = outside.data()[i] ? 0 : 1;
    return out;
}

/// Pixels of the region with a 4-neighbour outside it (or on the image border).
inline BinaryRaster outline(const BinaryRaster& region) {
    const int w = region.width(), h = region.height();
    BinaryRaster out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!region.at(x, y)) continue;
            const bool edge = !region.get_or(x + 1, y, false) || !region.get_or(x - 1, y, false) ||
                              !region.get_or(x, y + 1, false) || !region.get_or(x, y - 1, false);
            out.set(x, y, edge);
        }
    return out;
}

/// Nearest-neighbour resampling to round(w*s) x round(h*s).
inline BinaryRaster rescale_nearest(const BinaryRaster& in, double s) {
    const int nw = std::max(1, static_cast<int>(std::lround(in.width() * s)));
    const int nh = std::max(1, static_cast<int>(std::lround(in.height() * s)));
    BinaryRaster out(nw, nh);
    std::vector<int> sx(nw);
    for (int x = 0; x < nw; ++x)
        sx[x] = std::min(in.width() - 1, static_cast<int>(std::floor((x + 0.5) / s)));
    for (int y = 0; y < nh; ++y) {
        const int syy = std::min(in.height() - 1, static_cast<int>(std::floor((y + 0.5) / s)));
        for (int x = 0; x < nw; ++x) out.set(x, y, in.at(sx[x], syy));
    }
    return out;
}

/// Shifts content by (dx, dy); uncovered pixels are cleared.
inline BinaryRaster translate(const BinaryRaster& in, int dx, int dy) {
    BinaryRaster out(in.width(), in.height());
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x)
            if (in.at(x, y) && out.contains(x + dx, y + dy)) out.set(x + dx, y + dy);
    return out;
}

}  // namespace lectureseg
