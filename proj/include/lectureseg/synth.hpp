#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "image.hpp"

namespace lectureseg::synth {

/// Portable deterministic random source (mt19937_64 is fully specified; the
/// std distributions are not, so they are avoided).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int range(int lo, int hi) { return lo + static_cast<int>(engine_() % std::uint64_t(hi - lo + 1)); }
    bool chance(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr int kWidth = 320;
inline constexpr int kHeight = 240;

// ---------------------------------------------------------------------------
// drawing

inline std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

inline Rgb shade(Rgb c, double d) { return {clamp8(c.r + d), clamp8(c.g + d), clamp8(c.b + d)}; }

inline void fill_rect(Raster& img, int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = std::max(0, y0); y < std::min(img.height(), y1); ++y)
        for (int x = std::max(0, x0); x < std::min(img.width(), x1); ++x) img.at(x, y) = c;
}

inline void fill_ellipse(Raster& img, double cx, double cy, double rx, double ry, Rgb c) {
    for (int y = std::max(0, int(cy - ry)); y <= std::min(img.height() - 1, int(cy + ry) + 1); ++y)
        for (int x = std::max(0, int(cx - rx)); x <= std::min(img.width() - 1, int(cx + rx) + 1); ++x) {
            const double u = (x - cx) / rx, v = (y - cy) / ry;
            if (u * u + v * v <= 1.0) img.at(x, y) = c;
        }
}

inline void draw_segment(Raster& img, double x0, double y0, double x1, double y1, double radius, Rgb c) {
    const int bx0 = std::max(0, int(std::floor(std::min(x0, x1) - radius)));
    const int bx1 = std::min(img.width() - 1, int(std::ceil(std::max(x0, x1) + radius)));
    const int by0 = std::max(0, int(std::floor(std::min(y0, y1) - radius)));
    const int by1 = std::min(img.height() - 1, int(std::ceil(std::max(y0, y1) + radius)));
    const double dx = x1 - x0, dy = y1 - y0, len2 = dx * dx + dy * dy;
    for (int y = by0; y <= by1; ++y)
        for (int x = bx0; x <= bx1; ++x) {
            double t = len2 > 0 ? ((x - x0) * dx + (y - y0) * dy) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double ex = x0 + t * dx - x, ey = y0 + t * dy - y;
            if (ex * ex + ey * ey <= radius * radius) img.at(x, y) = c;
        }
}

inline Raster upscale(const Raster& in, int factor) {
    if (factor <= 1) return in;
    Raster out(in.width() * factor, in.height() * factor);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.at(x, y) = in.at(x / factor, y / factor);
    return out;
}

inline void add_noise(Raster& img, int amplitude, Rng& rng) {
    if (amplitude <= 0) return;
    for (Rgb& p : img.pixels()) {
        p.r = clamp8(p.r + rng.range(-amplitude, amplitude));
        p.g = clamp8(p.g + rng.range(-amplitude, amplitude));
        p.b = clamp8(p.b + rng.range(-amplitude, amplitude));
    }
}

// ---------------------------------------------------------------------------
// handwriting: each glyph is a short polyline in a 5 x 7 cell, glyphs are
// separated far enough that a 3x3 closing never joins them

struct Point {
    double x = 0, y = 0;
};

struct Glyph {
    std::array<Point, 5> pts{};
    int n = 0;
};

inline constexpr double kGlyphW = 5.0;
inline constexpr double kGlyphH = 7.0;
inline constexpr double kGlyphAdvance = 9.0;
inline constexpr double kLineSpacing = 15.0;

inline Glyph make_glyph(Rng& rng, double x, double y, double w = kGlyphW, double h = kGlyphH) {
    Glyph g;
    g.n = rng.range(3, 5);
    for (int k = 0; k < g.n; ++k) g.pts[k] = {x + rng.uniform(0, w), y + rng.uniform(0, h)};
    return g;
}

/// Letters of irregular size and spacing along a sloped baseline; returns
/// the x just past the last letter.
inline double make_word(Rng& rng, double x, double baseline, double slope, int letters, std::vector<Glyph>& out) {
    for (int k = 0; k < letters; ++k) {
        const double w = rng.uniform(3.5, 7.0);
        const double h = rng.uniform(5.0, 9.5);
        const double drop = rng.chance(0.2) ? rng.uniform(1.0, 3.0) : 0.0;  // descender
        const double top = baseline + slope * x - h + drop + rng.uniform(-0.8, 0.8);
        out.push_back(make_glyph(rng, x, top, w, h));
        x += w + rng.uniform(3.2, 5.0);
    }
    return x;
}

inline double word_width(int letters) { return letters * kGlyphAdvance - (kGlyphAdvance - kGlyphW); }

/// Writing surface of one topic, in local coordinates.
class Canvas {
public:
    Canvas(MediaType media, std::uint64_t seed) : media_(media), rng_(seed) {
        if (media == MediaType::Sheet) {
            x_min_ = -120, x_max_ = 120, y_min_ = -98;
        } else {
            x_min_ = 24, x_max_ = 296, y_min_ = 20;
        }
        lines_.resize(capacity());
        double y = y_min_ + 8;
        for (int i = 0; i < capacity(); ++i) {
            baseline_.push_back(y + rng_.uniform(-2, 2));
            slope_.push_back(rng_.uniform(-0.025, 0.025));
            y += rng_.uniform(13.5, 17.5);
        }
        cursor_x_ = x_min_ + rng_.uniform(0, 10);
    }

    MediaType media() const { return media_; }
    int capacity() const { return 13; }
    const std::vector<std::vector<Glyph>>& lines() const { return lines_; }
    bool full() const { return full_; }

    std::size_t glyph_count() const {
        std::size_t n = 0;
        for (const auto& l : lines_) n += l.size();
        return n;
    }

    void write_words(int words) {
        for (int w = 0; w < words && !full_; ++w) write_word();
    }

    /// Writes until `n` lines have been started.
    void write_lines(int n) {
        while (!full_ && cursor_line_ < n) write_word();
    }

    void erase_line(int line) {
        if (line >= 0 && line < capacity()) lines_[line].clear();
    }

    int cursor_line() const { return cursor_line_; }

private:
    void write_word() {
        const int letters = rng_.range(2, 6);
        std::vector<Glyph> word;
        Rng probe = rng_;
        const double width = make_word(probe, cursor_x_, 0, 0, letters, word) - cursor_x_;
        if (cursor_x_ + width > x_max_) {
            ++cursor_line_;
            cursor_x_ = x_min_ + rng_.uniform(0, 12);
            if (cursor_line_ >= capacity()) {
                if (media_ == MediaType::Sheet) {
                    full_ = true;
                    return;
                }
                cursor_line_ = 0;  // boards wrap to the top
            }
            if (!lines_[cursor_line_].empty()) {
                // erase before reusing board space
                erase_line(cursor_line_);
                erase_line(cursor_line_ + 1);
            }
        }
        word.clear();
        const double end = make_word(rng_, cursor_x_, baseline_[cursor_line_] - slope_[cursor_line_] * x_min_,
                                     slope_[cursor_line_], letters, word);
        lines_[cursor_line_].insert(lines_[cursor_line_].end(), word.begin(), word.end());
        cursor_x_ = end + rng_.uniform(6, 14);
    }

    MediaType media_;
    Rng rng_;
    double x_min_ = 0, x_max_ = 0, y_min_ = 0;
    std::vector<std::vector<Glyph>> lines_;
    std::vector<double> baseline_, slope_;
    int cursor_line_ = 0;
    double cursor_x_ = 0;
    bool full_ = false;
};

struct Camera {
    double pan_x = 0, pan_y = 0, zoom = 1.0;
};

inline constexpr Rgb kBoardGreen{38, 88, 58};
inline constexpr Rgb kChalk{222, 226, 214};
inline constexpr Rgb kWall{196, 186, 158};
inline constexpr Rgb kFrameMetal{150, 150, 146};
inline constexpr Rgb kDesk{118, 84, 56};
inline constexpr Rgb kPage{243, 243, 238};
inline constexpr Rgb kInk{30, 35, 72};
inline constexpr Rgb kSkin{205, 150, 122};
inline constexpr Rgb kShirt{42, 52, 92};

/// Board with its writing seen through a pan/zoom camera.
inline Raster render_board(const Canvas& canvas, const Camera& cam, Rng& rng, bool occluder = false,
                           int width = kWidth, int height = kHeight) {
    Raster img(width, height);
    const double sx = double(width) / kWidth, sy = double(height) / kHeight;
    auto to_canvas = [&](int u, int v) {
        const double cx = ((u / sx) - kWidth / 2.0) / cam.zoom + kWidth / 2.0 + cam.pan_x;
        const double cy = ((v / sy) - kHeight / 2.0) / cam.zoom + kHeight / 2.0 + cam.pan_y;
        return Point{cx, cy};
    };
    for (int v = 0; v < height; ++v)
        for (int u = 0; u < width; ++u) {
            const Point c = to_canvas(u, v);
            Rgb col = kWall;
            if (c.x >= -70 && c.x <= 390 && c.y >= 2 && c.y <= 300) {
                if (c.y < 8)
                    col = kFrameMetal;
                else
                    col = shade(kBoardGreen, 2.0 * std::sin(c.x / 37.0) + 1.5 * std::cos(c.y / 23.0));
            }
            img.at(u, v) = col;
        }
    auto to_view = [&](Point p) {
        return Point{((p.x - cam.pan_x - kWidth / 2.0) * cam.zoom + kWidth / 2.0) * sx,
                     ((p.y - cam.pan_y - kHeight / 2.0) * cam.zoom + kHeight / 2.0) * sy};
    };
    const double radius = 0.65 * cam.zoom * sx;
    for (const auto& line : canvas.lines())
        for (const auto& g : line)
            for (int k = 0; k + 1 < g.n; ++k) {
                const Point a = to_view(g.pts[k]), b = to_view(g.pts[k + 1]);
                draw_segment(img, a.x, a.y, b.x, b.y, radius, kChalk);
            }
    if (occluder) {
        const double cx = rng.uniform(0.25, 0.75) * width;
        fill_rect(img, int(cx - 0.11 * width), int(0.55 * height), int(cx + 0.11 * width), height, kShirt);
        fill_ellipse(img, cx, 0.47 * height, 0.05 * width, 0.08 * height, kSkin);
    }
    add_noise(img, 1, rng);
    return img;
}

/// Sheet of paper on a desk, writing in page coordinates rotated by `angle`.
inline Raster render_sheet(const Canvas& canvas, const Camera& cam, double angle, Rng& rng, bool hand,
                           int width = kWidth, int height = kHeight) {
    Raster img(width, height);
    const double sx = double(width) / kWidth, sy = double(height) / kHeight;
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (int v = 0; v < height; ++v)
        for (int u = 0; u < width; ++u) {
            const double cx = ((u / sx) - kWidth / 2.0) / cam.zoom + cam.pan_x;
            const double cy = ((v / sy) - kHeight / 2.0) / cam.zoom + cam.pan_y;
            const double px = ca * cx + sa * cy, py = -sa * cx + ca * cy;
            const bool on_page = std::abs(px) <= 142 && std::abs(py) <= 170;
            img.at(u, v) = on_page ? kPage : shade(kDesk, 3.0 * std::sin(cx / 11.0 + cy / 53.0));
        }
    auto to_view = [&](Point p) {
        const double cx = ca * p.x - sa * p.y, cy = sa * p.x + ca * p.y;
        return Point{((cx - cam.pan_x) * cam.zoom + kWidth / 2.0) * sx, ((cy - cam.pan_y) * cam.zoom + kHeight / 2.0) * sy};
    };
    const double radius = 0.6 * cam.zoom * sx;
    Point last{0, 0};
    bool any = false;
    for (const auto& line : canvas.lines())
        for (const auto& g : line)
            for (int k = 0; k + 1 < g.n; ++k) {
                const Point a = to_view(g.pts[k]), b = to_view(g.pts[k + 1]);
                draw_segment(img, a.x, a.y, b.x, b.y, radius, kInk);
                last = b;
                any = true;
            }
    if (hand && any) {
        // writing hand just below and right of the most recent word
        const double hx = std::clamp(last.x + 28 * sx, 0.0, double(width)), hy = std::clamp(last.y + 24 * sy, 0.0, double(height));
        fill_ellipse(img, hx, hy, 24 * sx, 15 * sy, kSkin);
        fill_rect(img, int(hx + 10 * sx), int(hy), int(hx + 60 * sx), height, shade(kSkin, -12));
    }
    add_noise(img, 1, rng);
    return img;
}

// ---------------------------------------------------------------------------
// single labelled frames

enum class ComputerStyle { Auto, Bordered, LightUi, Dark, Colored, Slide, GreenSlide };

struct GenOptions {
    ComputerStyle computer = ComputerStyle::Auto;
    bool title = false;        // control-room title panel (podium)
    bool board_occluder = false;
    double illustration_table_rate = 0.08;
    int scale = 1;  // output is (320 x 240) * scale
};

/// Expected ranges of a few classifier measures, by construction.
struct FeatureBounds {
    double green_frac_min = 0;
    double green_bottom_max = 1;
    double white_frac_min = 0;
    double light_frac_min = 0;
    double border_lr_min = 0;
};

struct GeneratedFrame {
    Raster raster;
    MediaType media = MediaType::Unknown;
    FeatureBounds bounds;
    ComputerStyle style = ComputerStyle::Auto;
    bool dark_or_bordered = false;
};

namespace detail {

inline void text_lines(Raster& img, Rng& rng, int x0, int x1, int y0, int y1, double spacing, Rgb ink, double radius,
                       double glyph_scale = 1.0) {
    for (double y = y0; y + kGlyphH * glyph_scale <= y1; y += spacing) {
        double x = x0 + rng.uniform(0, 10);
        while (true) {
            const int letters = rng.range(2, 5);
            const double w = word_width(letters) * glyph_scale;
            if (x + w > x1) break;
            for (int k = 0; k < letters; ++k) {
                Glyph g = make_glyph(rng, 0, 0);
                for (int p = 0; p + 1 < g.n; ++p)
                    draw_segment(img, x + k * kGlyphAdvance * glyph_scale + g.pts[p].x * glyph_scale,
                                 y + g.pts[p].y * glyph_scale, x + k * kGlyphAdvance * glyph_scale + g.pts[p + 1].x * glyph_scale,
                                 y + g.pts[p + 1].y * glyph_scale, radius, ink);
            }
            x += w + rng.uniform(8, 14) * glyph_scale;
        }
    }
}

// short dashes standing in for rendered UI text
inline void ui_text(Raster& img, Rng& rng, int x0, int x1, int y0, int y1, int spacing, Rgb ink) {
    for (int y = y0; y + 2 <= y1; y += spacing) {
        int x = x0 + rng.range(0, 6);
        const int end = x0 + int((x1 - x0) * rng.uniform(0.4, 1.0));
        while (x < end) {
            const int w = rng.range(6, 18);
            fill_rect(img, x, y, std::min(x + w, end), y + 2, ink);
            x += w + rng.range(3, 6);
        }
    }
}

inline Raster computer_interior(ComputerStyle style, Rng& rng, int width, int height) {
    Raster img(width, height);
    switch (style) {
        case ComputerStyle::Dark: {
            fill_rect(img, 0, 0, width, height, Rgb{26, 28, 36});
            fill_rect(img, 0, 0, width, 12, Rgb{45, 48, 58});
            const Rgb inks[] = {{170, 120, 200}, {110, 170, 210}, {200, 190, 120}, {150, 150, 150}};
            for (int y = 20; y + 2 < height; y += 9) {
                int x = 8 + 8 * rng.range(0, 4);
                const int end = x + rng.range(30, width - 40);
                while (x < std::min(end, width - 4)) {
                    const int w = rng.range(5, 16);
                    fill_rect(img, x, y, std::min(x + w, width - 4), y + 2, inks[rng.range(0, 3)]);
                    x += w + 4;
                }
            }
            break;
        }
        case ComputerStyle::Colored: {
            const Rgb bgs[] = {{150, 60, 160}, {230, 140, 40}, {190, 50, 50}, {40, 60, 150}, {90, 90, 100}};
            const Rgb bg = bgs[rng.range(0, 4)];
            fill_rect(img, 0, 0, width, height, bg);
            fill_rect(img, 0, 0, width, 22, shade(bg, -40));
            const int panels = rng.range(1, 3);
            for (int p = 0; p < panels; ++p) {
                const int y0 = 30 + p * (height - 40) / panels;
                const int y1 = y0 + (height - 40) / panels - 8;
                fill_rect(img, 12, y0, width - 12, y1, shade(bg, 50));
                ui_text(img, rng, 20, width - 20, y0 + 6, y1 - 4, 9, shade(bg, -70));
            }
            break;
        }
        case ComputerStyle::Slide: {
            fill_rect(img, 0, 0, width, height, Rgb{250, 250, 250});
            text_lines(img, rng, 30, width - 30, 14, 40, 20, Rgb{20, 30, 90}, 1.4, 2.0);
            fill_rect(img, 20, 46, width - 20, 48, Rgb{20, 30, 90});
            for (int y = 62; y + 10 < height - 10; y += 22) {
                fill_ellipse(img, 30, y + 4, 3, 3, Rgb{20, 30, 90});
                text_lines(img, rng, 40, int(width * rng.uniform(0.55, 0.95)), y, y + 12, 30, Rgb{30, 30, 30}, 0.8);
            }
            break;
        }
        case ComputerStyle::GreenSlide: {
            const Rgb bg{34, 120, 72};
            fill_rect(img, 0, 0, width, height, bg);
            fill_rect(img, 0, 0, width, 40, Rgb{24, 90, 52});
            text_lines(img, rng, 24, width - 24, 12, 34, 20, Rgb{240, 240, 230}, 1.2, 1.8);
            for (int y = 56; y + 10 < height - 8; y += 20)
                text_lines(img, rng, 36, int(width * rng.uniform(0.5, 0.92)), y, y + 10, 30, Rgb{235, 240, 225}, 0.8);
            break;
        }
        case ComputerStyle::LightUi:
        default: {
            fill_rect(img, 0, 0, width, height, Rgb{58, 110, 165});
            fill_rect(img, 0, 0, width, 10, Rgb{225, 225, 228});
            fill_rect(img, 0, 10, width, 11, Rgb{120, 120, 124});
            const int wx0 = rng.range(4, 14), wx1 = width - rng.range(4, 14);
            const int wy0 = rng.range(16, 24), wy1 = height - rng.range(6, 16);
            fill_rect(img, wx0, wy0, wx1, wy1, Rgb{252, 252, 252});
            fill_rect(img, wx0, wy0, wx1, wy0 + 11, Rgb{0, 90, 180});
            fill_rect(img, wx0, wy0 + 11, wx1, wy0 + 22, Rgb{236, 236, 238});
            fill_rect(img, wx0, wy0 + 22, wx1, wy0 + 23, Rgb{170, 170, 170});
            ui_text(img, rng, wx0 + 8, wx1 - 8, wy0 + 30, wy1 - 6, 9, Rgb{40, 40, 40});
            break;
        }
    }
    return img;
}

}  // namespace detail

inline Raster gen_title(Rng& rng, int width = kWidth, int height = kHeight) {
    Raster img(width, height, Rgb{6, 6, 8});
    detail::text_lines(img, rng, width / 5, width * 4 / 5, height / 3, height / 3 + 30, 18, Rgb{235, 235, 235}, 1.2, 1.6);
    detail::text_lines(img, rng, width / 4, width * 3 / 4, height / 2 + 10, height / 2 + 40, 16, Rgb{200, 200, 200}, 0.9);
    add_noise(img, 1, rng);
    return img;
}

inline Raster gen_podium(Rng& rng, int width = kWidth, int height = kHeight) {
    Raster img(width, height, kWall);
    const int board_top = int(height * rng.uniform(0.12, 0.20));
    const int desk_top = int(height * rng.uniform(0.80, 0.86));
    fill_rect(img, 0, board_top - 3, width, board_top, kFrameMetal);
    for (int y = board_top; y < desk_top; ++y)
        for (int x = 0; x < width; ++x) img.at(x, y) = shade(kBoardGreen, 2.0 * std::sin(x / 37.0));
    detail::text_lines(img, rng, 20, width - 20, board_top + 8, board_top + 45, 15, kChalk, 0.9);
    fill_rect(img, 0, desk_top, width, height, kDesk);
    const double cx = rng.uniform(0.3, 0.7) * width;
    const double half = rng.uniform(0.09, 0.13) * width;
    const Rgb shirt = rng.chance(0.5) ? kShirt : Rgb{110, 40, 40};
    fill_rect(img, int(cx - half), int(height * 0.45), int(cx + half), height, shirt);
    fill_ellipse(img, cx, height * 0.36, 0.05 * width, 0.085 * height, kSkin);
    fill_ellipse(img, cx, height * 0.29, 0.05 * width, 0.04 * height, Rgb{60, 40, 30});
    add_noise(img, 1, rng);
    return img;
}

inline Raster gen_illustration(Rng& rng, bool table, int width = kWidth, int height = kHeight) {
    const Rgb palette[] = {{210, 120, 80}, {90, 110, 200}, {180, 80, 150}, {220, 190, 90},
                           {200, 90, 90},  {120, 70, 160}, {230, 160, 120}, {70, 90, 160}};
    Raster img(width, height);
    const Rgb bg = palette[rng.range(0, 7)];
    const double fx = rng.uniform(20, 60), fy = rng.uniform(20, 60);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img.at(x, y) = shade(bg, 12 * std::sin(x / fx) * std::cos(y / fy));
    const int blobs = rng.range(3, 7);
    for (int b = 0; b < blobs; ++b)
        fill_ellipse(img, rng.uniform(0, width), rng.uniform(0, height), rng.uniform(15, 70), rng.uniform(15, 60),
                     palette[rng.range(0, 7)]);
    if (table) {
        for (int y = 30; y < height - 20; y += 26) fill_rect(img, 14, y, width - 14, y + 2, Rgb{40, 30, 30});
    } else {
        detail::text_lines(img, rng, 20, width - 20, height - 50, height - 14, 14, Rgb{40, 30, 40}, 0.7);
    }
    add_noise(img, 5, rng);
    return img;
}

inline Raster gen_computer(ComputerStyle style, Rng& rng, int width = kWidth, int height = kHeight) {
    Raster img(width, height);
    if (style == ComputerStyle::Bordered) {
        const int left = int(width * rng.uniform(0.06, 0.10));
        const int right = int(width * rng.uniform(0.06, 0.10));
        const ComputerStyle inner[] = {ComputerStyle::LightUi, ComputerStyle::Slide, ComputerStyle::Colored,
                                       ComputerStyle::GreenSlide};
        const Raster interior = detail::computer_interior(inner[rng.range(0, 3)], rng, width - left - right, height);
        img = Raster(width, height, Rgb{0, 0, 0});
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < interior.width(); ++x) img.at(left + x, y) = interior.at(x, y);
    } else {
        img = detail::computer_interior(style, rng, width, height);
    }
    add_noise(img, 1, rng);
    return img;
}

inline Raster gen_board(Rng& rng, bool occluder, int width = kWidth, int height = kHeight) {
    Canvas canvas(MediaType::Board, rng.next());
    canvas.write_lines(rng.range(3, 11));
    Camera cam{rng.uniform(-20, 20), rng.uniform(-15, 15), rng.uniform(0.85, 1.2)};
    return render_board(canvas, cam, rng, occluder, width, height);
}

inline Raster gen_sheet(Rng& rng, int width = kWidth, int height = kHeight) {
    Canvas canvas(MediaType::Sheet, rng.next());
    canvas.write_lines(rng.range(3, 12));
    const double angle = (rng.chance(0.5) ? 1 : -1) * rng.uniform(4, 7) * 3.14159265358979 / 180.0;
    Camera cam{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(0.95, 1.1)};
    return render_sheet(canvas, cam, angle, rng, rng.chance(0.6), width, height);
}

/// One labelled frame of the given media type, deterministic per seed.
inline GeneratedFrame gen_frame(MediaType media, std::uint64_t seed, const GenOptions& opt = {}) {
    if (media == MediaType::Class || media == MediaType::Unknown)
        throw std::invalid_argument("cannot generate Class or Unknown frames");
    Rng rng(mix(seed, static_cast<std::uint64_t>(media)));
    GeneratedFrame out;
    out.media = media;
    switch (media) {
        case MediaType::Board:
            out.raster = gen_board(rng, opt.board_occluder || rng.chance(0.2), kWidth * opt.scale, kHeight * opt.scale);
            out.bounds.green_frac_min = 0.5;
            break;
        case MediaType::Podium:
            out.raster = upscale(opt.title ? gen_title(rng) : gen_podium(rng), opt.scale);
            if (!opt.title) {
                out.bounds.green_frac_min = 0.4;
                out.bounds.green_bottom_max = 0.05;
            }
            break;
        case MediaType::Sheet:
            out.raster = gen_sheet(rng, kWidth * opt.scale, kHeight * opt.scale);
            out.bounds.white_frac_min = 0.5;
            out.bounds.light_frac_min = 0.6;
            break;
        case MediaType::Illustration:
            out.raster = upscale(gen_illustration(rng, rng.chance(opt.illustration_table_rate)), opt.scale);
            break;
        case MediaType::Computer: {
            ComputerStyle style = opt.computer;
            if (style == ComputerStyle::Auto) {
                const ComputerStyle pick[] = {ComputerStyle::Bordered, ComputerStyle::LightUi, ComputerStyle::Dark,
                                              ComputerStyle::Colored, ComputerStyle::Slide};
                style = pick[rng.range(0, 4)];
            }
            out.style = style;
            out.raster = upscale(gen_computer(style, rng), opt.scale);
            out.dark_or_bordered = style == ComputerStyle::Bordered || style == ComputerStyle::Dark;
            if (style == ComputerStyle::Bordered) out.bounds.border_lr_min = 0.9;
            break;
        }
        default: break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// scripted lectures

enum class EventKind { Write, Erase, Pan, Zoom, NewTopic, CutTo, Revisit, Hold };

enum class FrameVariant { Normal, Title, Slide, Fade, GreenSlide };

struct Event {
    EventKind kind = EventKind::Hold;
    int n = 0;           // words (Write), line (Erase), topic (Revisit)
    double a = 0, b = 0; // pan dx, dy / zoom factor in a
    MediaType media = MediaType::Board;
    FrameVariant variant = FrameVariant::Normal;
};

struct LectureScript {
    std::uint64_t seed = 0;
    std::vector<Event> events;
    int frame_every = 2;
    int scale = 2;  // frames are (320 x 240) * scale
};

enum class TruthEvent { None, Consecutive, Prior, NewTopic };

struct FrameTruth {
    MediaType media = MediaType::Unknown;
    int topic = -1;
    FrameVariant variant = FrameVariant::Normal;
    TruthEvent event = TruthEvent::None;

    std::string file_suffix() const {
        if (variant == FrameVariant::Title) return "_title";
        if (variant == FrameVariant::Slide) return "_ppt";
        return "";
    }
};

struct Lecture {
    std::vector<Raster> frames;
    std::vector<FrameTruth> truth;
    int topics = 0;
};

inline void validate(const LectureScript& script) {
    if (script.frame_every < 1) throw std::invalid_argument("frame_every must be positive");
    if (script.scale < 1 || script.scale > 4) throw std::invalid_argument("scale must be in [1, 4]");
    for (const auto& e : script.events)
        if (e.kind == EventKind::Zoom && (e.a < 0.6 || e.a > 1.7))
            throw std::invalid_argument("zoom factor outside [0.6, 1.7]");
}

/// Plays the script, emitting a key frame after every `frame_every` events.
inline Lecture gen_lecture(const LectureScript& script) {
    validate(script);
    struct TopicState {
        Canvas canvas;
        Camera camera;
        double angle = 0;
        int last_frame = -1;
    };
    std::vector<TopicState> topics;
    int current = -1;  // topic shown, or -1 for a non-clustered view
    MediaType other_media = MediaType::Podium;
    FrameVariant other_variant = FrameVariant::Normal;
    std::uint64_t other_seed = 0;
    std::vector<int> last_topic_of(2, -1);  // per media: board, sheet
    Rng rng(mix(script.seed, 1));

    Lecture out;
    const int width = kWidth * script.scale, height = kHeight * script.scale;
    const Raster* fade_base = nullptr;
    Raster last_clustered;
    auto emit = [&]() {
        const int k = static_cast<int>(out.frames.size());
        Rng noise(mix(script.seed, 1000 + k));
        FrameTruth t;
        if (current >= 0) {
            auto& ts = topics[current];
            t.media = ts.canvas.media();
            t.topic = current;
            const int slot = t.media == MediaType::Board ? 0 : 1;
            if (ts.last_frame < 0)
                t.event = TruthEvent::NewTopic;
            else
                t.event = last_topic_of[slot] == current ? TruthEvent::Consecutive : TruthEvent::Prior;
            last_topic_of[slot] = current;
            ts.last_frame = k;
            out.frames.push_back(t.media == MediaType::Board
                                     ? render_board(ts.canvas, ts.camera, noise, false, width, height)
                                     : render_sheet(ts.canvas, ts.camera, ts.angle, noise, noise.chance(0.5), width, height));
            last_clustered = out.frames.back();
            fade_base = &last_clustered;
        } else {
            t.media = other_media;
            t.variant = other_variant;
            const std::uint64_t seed = mix(other_seed, k);
            Rng frng(seed);
            switch (other_variant) {
                case FrameVariant::Title: out.frames.push_back(upscale(gen_title(frng), script.scale)); break;
                case FrameVariant::GreenSlide:
                    out.frames.push_back(upscale(gen_computer(ComputerStyle::GreenSlide, frng), script.scale));
                    break;
                case FrameVariant::Fade: {
                    // dissolve between the closing title panel and the last scene
                    Raster title = upscale(gen_title(frng), script.scale);
                    const double alpha = frng.uniform(0.15, 0.3);
                    if (fade_base)
                        for (std::size_t i = 0; i < title.size(); ++i) {
                            const Rgb a = title.pixels()[i], b = fade_base->pixels()[i];
                            title.pixels()[i] = {clamp8((1 - alpha) * a.r + alpha * b.r),
                                                 clamp8((1 - alpha) * a.g + alpha * b.g),
                                                 clamp8((1 - alpha) * a.b + alpha * b.b)};
                        }
                    out.frames.push_back(std::move(title));
                    break;
                }
                default: {
                    GenOptions opt;
                    opt.computer = other_variant == FrameVariant::Slide ? ComputerStyle::Slide : ComputerStyle::Auto;
                    opt.scale = script.scale;
                    out.frames.push_back(gen_frame(other_media, seed, opt).raster);
                }
            }
        }
        out.truth.push_back(t);
    };

    int pending = 0;
    for (const auto& e : script.events) {
        switch (e.kind) {
            case EventKind::Write:
                if (current >= 0) topics[current].canvas.write_words(e.n);
                break;
            case EventKind::Erase:
                if (current >= 0) topics[current].canvas.erase_line(e.n);
                break;
            case EventKind::Pan:
                if (current >= 0) {
                    auto& cam = topics[current].camera;
                    // the camera follows the writing, so content stays in view
                    if (topics[current].canvas.media() == MediaType::Sheet) {
                        cam.pan_x = std::clamp(cam.pan_x + e.a, -14.0, 14.0);
                        cam.pan_y = std::clamp(cam.pan_y + e.b, -8.4, 8.4);
                    } else {
                        cam.pan_x = std::clamp(cam.pan_x + e.a, -18.0, 18.0);
                        cam.pan_y = std::clamp(cam.pan_y + e.b, -26.0, 4.0);
                    }
                }
                break;
            case EventKind::Zoom:
                if (current >= 0) topics[current].camera.zoom = e.a;
                break;
            case EventKind::NewTopic: {
                TopicState ts{Canvas(e.media, mix(script.seed, 5000 + topics.size())), Camera{}, 0, -1};
                ts.canvas.write_lines(rng.range(2, 3));
                if (e.media == MediaType::Sheet) {
                    ts.angle = (rng.chance(0.5) ? 1 : -1) * rng.uniform(4, 7) * 3.14159265358979 / 180.0;
                    ts.camera.zoom = rng.uniform(0.95, 1.1);
                    ts.camera.pan_y = -40;  // fresh sheets show the top of the page
                } else {
                    ts.camera.zoom = rng.uniform(0.9, 1.1);
                    ts.camera.pan_y = -20;
                }
                topics.push_back(std::move(ts));
                current = static_cast<int>(topics.size()) - 1;
                break;
            }
            case EventKind::Revisit:
                if (e.n >= 0 && e.n < static_cast<int>(topics.size())) current = e.n;
                break;
            case EventKind::CutTo:
                current = -1;
                other_media = e.media;
                other_variant = e.variant;
                other_seed = mix(script.seed, 9000 + static_cast<std::uint64_t>(rng.next() % 100000));
                break;
            case EventKind::Hold: break;
        }
        if (++pending == script.frame_every) {
            pending = 0;
            emit();
        }
    }
    out.topics = static_cast<int>(topics.size());
    return out;
}

enum class Profile { Linear, Interleaved, Mixed };

inline Profile profile_from_string(const std::string& s) {
    if (s == "linear") return Profile::Linear;
    if (s == "interleaved") return Profile::Interleaved;
    if (s == "mixed") return Profile::Mixed;
    throw std::invalid_argument("unknown profile '" + s + "'");
}

namespace detail {

class ScriptBuilder {
public:
    explicit ScriptBuilder(std::uint64_t seed) : rng_(mix(seed, 2)) { script_.seed = seed; }

    int frames() const { return frames_; }
    Rng& rng() { return rng_; }

    // camera drift plus occasional writing for a frame that stays on its topic
    void continue_topic(MediaType media) {
        if (rng_.chance(0.08) && media == MediaType::Board)
            push({EventKind::Zoom, 0, rng_.uniform(0.88, 1.15)});
        else
            push({EventKind::Pan, 0, rng_.uniform(-8, 8), rng_.uniform(-5, 5)});
        push({EventKind::Write, rng_.chance(0.55) ? rng_.range(1, 3) : 0});
        ++frames_;
    }

    void new_topic(MediaType media) {
        Event e{EventKind::NewTopic};
        e.media = media;
        push(e);
        push({EventKind::Pan, 0, rng_.uniform(-10, 10), rng_.uniform(-4, 4)});
        ++frames_;
        ++topics_;
    }

    void revisit(int topic) {
        push({EventKind::Revisit, topic});
        push({EventKind::Pan, 0, rng_.uniform(-8, 8), rng_.uniform(-5, 5)});
        ++frames_;
    }

    void other(MediaType media, FrameVariant variant = FrameVariant::Normal) {
        Event e{EventKind::CutTo};
        e.media = media;
        e.variant = variant;
        push(e);
        push({EventKind::Hold});
        ++frames_;
    }

    int topics() const { return topics_; }
    LectureScript take() { return std::move(script_); }

private:
    void push(Event e) { script_.events.push_back(e); }

    Rng rng_;
    LectureScript script_;
    int frames_ = 0;
    int topics_ = 0;
};

// short excursion away from the board/sheet
inline void excursion(ScriptBuilder& b, int max_len) {
    const int len = b.rng().range(1, max_len);
    const bool computer = b.rng().chance(0.4);
    for (int k = 0; k < len; ++k) {
        if (computer)
            b.other(MediaType::Computer, k == 0 && b.rng().chance(0.5) ? FrameVariant::Slide : FrameVariant::Normal);
        else
            b.other(MediaType::Podium);
    }
}

inline void closing(ScriptBuilder& b) {
    b.other(MediaType::Podium);
    b.other(MediaType::Podium, FrameVariant::Fade);
    b.other(MediaType::Podium, FrameVariant::Title);
}

inline void opening(ScriptBuilder& b) {
    b.other(MediaType::Podium, FrameVariant::Title);
    b.other(MediaType::Podium);
}

}  // namespace detail

/// Builds the event script for a profile with exactly `frames` key frames.
/// linear: topics follow one another; interleaved: pairs of topics alternate;
/// mixed: board only, consecutive/prior/new events in 0.89/0.036/0.074 proportion.
inline LectureScript make_script(Profile profile, int frames, std::uint64_t seed) {
    if (frames < 12) throw std::invalid_argument("lectures need at least 12 frames");
    detail::ScriptBuilder b(seed);
    auto& rng = b.rng();

    if (profile == Profile::Mixed) {
        const int n_new = std::max(1, static_cast<int>(std::lround(0.074 * frames)));
        const int n_prior = static_cast<int>(std::lround(0.036 * frames));
        // positions 1..frames-1 receive the non-consecutive events
        std::vector<int> kind(frames, 0);  // 0 consecutive, 1 prior, 2 new
        kind[0] = 2;
        // one event per stratum keeps topic creation steady over the lecture
        auto place = [&](int count, int value, int lo) {
            const double width = double(frames - lo) / std::max(1, count);
            for (int k = 0; k < count; ++k) {
                const int a = lo + static_cast<int>(k * width), z = std::max(a, lo + static_cast<int>((k + 1) * width) - 1);
                for (int tries = 0; tries < 64; ++tries) {
                    const int p = rng.range(a, std::min(z, frames - 1));
                    if (kind[p] != 0 || kind[p - 1] != 0) continue;
                    kind[p] = value;
                    break;
                }
            }
        };
        place(n_new - 1, 2, 3);
        // a prior-topic event needs at least two topics to exist
        int second_new = frames;
        for (int p = 1; p < frames; ++p)
            if (kind[p] == 2) { second_new = p; break; }
        place(n_prior, 1, std::min(second_new + 2, frames - 1));
        std::vector<int> recency;  // most recent last
        int topic_count = 0;
        for (int p = 0; p < frames; ++p) {
            if (kind[p] == 2) {
                b.new_topic(MediaType::Board);
                recency.push_back(topic_count++);
            } else if (kind[p] == 1 && recency.size() >= 2) {
                const int pick = rng.range(0, static_cast<int>(recency.size()) - 2);
                const int t = recency[pick];
                recency.erase(recency.begin() + pick);
                recency.push_back(t);
                b.revisit(t);
            } else {
                b.continue_topic(MediaType::Board);
            }
        }
        return b.take();
    }

    detail::opening(b);
    const int body = frames - 2 - 3;
    const int sheet_frames = body / 6;
    const int board_frames = body - sheet_frames;
    int board_topics = std::max(2, static_cast<int>(std::lround(board_frames * rng.uniform(0.07, 0.10))));
    const int sheet_topics = std::max(1, static_cast<int>(std::lround(sheet_frames * 0.09)));
    const int sheet_at = board_frames / 2;

    auto run_sheets = [&]() {
        const int per = sheet_frames / sheet_topics;
        for (int t = 0; t < sheet_topics; ++t) {
            const int len = t + 1 == sheet_topics ? sheet_frames - per * t : per;
            b.new_topic(MediaType::Sheet);
            for (int k = 1; k < len; ++k) b.continue_topic(MediaType::Sheet);
        }
    };

    bool sheets_done = false;
    int used = 0;
    auto maybe_sheets = [&]() {
        if (!sheets_done && used >= sheet_at) {
            run_sheets();
            sheets_done = true;
        }
    };

    if (profile == Profile::Linear) {
        const int per = board_frames / board_topics;
        for (int t = 0; t < board_topics; ++t) {
            const int len = t + 1 == board_topics ? board_frames - per * t : per;
            b.new_topic(MediaType::Board);
            const int topic = b.topics() - 1;
            int written = 1;
            while (written < len) {
                if (rng.chance(0.06) && written + 1 < len) {
                    const int before = b.frames();
                    detail::excursion(b, std::min(3, len - written - 1));
                    written += b.frames() - before;
                    b.revisit(topic);
                } else {
                    b.continue_topic(MediaType::Board);
                }
                ++written;
            }
            used += len;
            maybe_sheets();
        }
    } else {
        // pairs of topics alternate in blocks
        board_topics += board_topics % 2;
        const int per_pair = board_frames / (board_topics / 2);
        for (int pair = 0; pair < board_topics / 2; ++pair) {
            const int len = pair + 1 == board_topics / 2 ? board_frames - per_pair * pair : per_pair;
            int written = 0;
            int first = -1, second = -1, on = 0;
            while (written < len) {
                const int block = std::min(len - written, rng.range(3, 7));
                if (first < 0) {
                    b.new_topic(MediaType::Board);
                    first = b.topics() - 1;
                    on = first;
                } else if (second < 0) {
                    b.new_topic(MediaType::Board);
                    second = b.topics() - 1;
                    on = second;
                } else {
                    on = on == first ? second : first;
                    b.revisit(on);
                }
                for (int k = 1; k < block; ++k) b.continue_topic(MediaType::Board);
                written += block;
            }
            used += len;
            maybe_sheets();
        }
    }
    if (!sheets_done) run_sheets();
    detail::closing(b);
    // pad or trim to the requested length with podium frames
    LectureScript s = b.take();
    const int have = static_cast<int>(s.events.size()) / s.frame_every;
    for (int k = have; k < frames; ++k) {
        Event e{EventKind::CutTo};
        e.media = MediaType::Podium;
        s.events.insert(s.events.end() - 6, {e, Event{EventKind::Hold}});
    }
    if (have > frames) throw std::logic_error("script builder overshot the frame budget");
    return s;
}

}  // namespace lectureseg::synth
