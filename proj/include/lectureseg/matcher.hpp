#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "image.hpp"

namespace lectureseg {

struct SubWindow {
    int x = 0, y = 0;
    int w = 0, h = 0;
    std::size_t cc = 0;

    friend bool operator==(const SubWindow&, const SubWindow&) = default;
};

struct WindowCorrespondence {
    SubWindow source;
    int target_x = 0, target_y = 0;
    double quality = 0;
    int dx = 0, dy = 0;
};

struct MatchConfig {
    int window_rows = 8;  // window height = frame height / window_rows, width = 2 * height
    double cc_low = 0.05;
    double cc_high = 0.30;
    std::vector<double> scales{1.0,   1.08,  0.926, 1.166, 0.857, 1.26, 0.794,
                               1.36,  0.735, 1.469, 0.681, 1.587, 0.63, 1.7};
    int coarse_stride = 4;       // cell size of the bounded search
    int coarse_candidates = 48;  // cells refined at most, best bound first
    std::size_t exhaustive_max_placements = 8192;
    double w_n = 0.25, w_q = 0.45, w_t = 0.15, w_s = 0.15;
    double tau_frac = 0.02;
    double score_threshold = 0.72;
    double q_min = 0.5;
    // stop searching a scale once acceptance is impossible; rejected results
    // then list only the windows searched
    bool early_reject = true;

    void validate() const {
        if (std::abs(w_n + w_q + w_t + w_s - 1.0) > 1e-9) throw std::invalid_argument("match weights must sum to 1");
        if (scales.size() != 14) throw std::invalid_argument("scale ladder must have 14 entries");
        for (double s : scales)
            if (s < 0.6 - 1e-12 || s > 1.7 + 1e-12) throw std::invalid_argument("scale ladder entry outside [0.6, 1.7]");
        if (cc_low < 0 || cc_high > 1 || cc_low > cc_high) throw std::invalid_argument("bad content bounds");
        if (coarse_stride < 1 || coarse_candidates < 1) throw std::invalid_argument("bad search strides");
    }
};

struct MatchScore {
    double score = 0;
    double sigma_trans = 0;
    double sigma_spatial = 0;
    double q_mean = 0;
    int n_matched = 0;
    bool accepted = false;
};

struct MatchResult {
    std::vector<WindowCorrespondence> correspondences;
    int n_windows_found = 0;
    int n_matched = 0;
    double q_mean = 0;
    double sigma_trans = 0;
    double sigma_spatial = 0;
    double scale = 1.0;
    double score = 0;
    bool accepted = false;
    int scales_tried = 0;
};

/// Binary raster packed 64 pixels per word. Reads outside the raster return
/// zeros for up to `pad_words` words beyond either side and for any row.
class BitMatrix {
public:
    BitMatrix() = default;
    explicit BitMatrix(const BinaryRaster& m, int pad_words = 0)
        : width_(m.width()), height_(m.height()), pad_(pad_words), words_((m.width() + 63) / 64 + 2 * pad_words + 2) {
        data_.assign(static_cast<std::size_t>(words_) * height_, 0);
        const std::uint8_t* px = m.data().data();
        for (int y = 0; y < height_; ++y) {
            std::uint64_t* row = &data_[static_cast<std::size_t>(y) * words_];
            for (int x = 0; x < width_; ++x)
                if (px[static_cast<std::size_t>(y) * width_ + x]) {
                    const int b = x + 64 * pad_;
                    row[b >> 6] |= std::uint64_t{1} << (b & 63);
                }
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int pad_bits() const { return 64 * pad_; }

    /// 64 pixels of `row` starting at column `bit`.
    std::uint64_t extract(int row, int bit) const {
        if (row < 0 || row >= height_) return 0;
        bit += 64 * pad_;
        const std::uint64_t* r = &data_[static_cast<std::size_t>(row) * words_];
        const int q = bit >> 6, s = bit & 63;
        if (s == 0) return r[q];
        return (r[q] >> s) | (r[q + 1] << (64 - s));
    }

private:
    int width_ = 0, height_ = 0, pad_ = 0, words_ = 0;
    std::vector<std::uint64_t> data_;
};

namespace detail {

// out(x, y) = OR of in(x - a, y - b) for a, b in [0, s); out is s - 1 pixels larger
inline BinaryRaster trailing_max(const BinaryRaster& in, int s) {
    const int iw = in.width(), ih = in.height(), W = iw + s - 1, H = ih + s - 1;
    BinaryRaster rows(W, ih), out(W, H);
    const std::uint8_t* src = in.data().data();
    std::uint8_t* mid = rows.data().data();
    for (int y = 0; y < ih; ++y) {
        int last = -s;
        for (int x = 0; x < W; ++x) {
            if (x < iw && src[y * iw + x]) last = x;
            mid[y * W + x] = x - last < s;
        }
    }
    // vertical pass, row by row: out row y is the OR of mid rows y - s + 1 .. y
    std::uint8_t* dst = out.data().data();
    std::vector<int> last(W, -s);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            if (y < ih && mid[y * W + x]) last[x] = y;
            dst[y * W + x] = y - last[x] < s;
        }
    return out;
}

// window content as its non-zero 64-bit words
struct WindowTemplate {
    struct Word {
        int row, offset;
        std::uint64_t bits;
    };
    int w = 0, h = 0;
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // content bounding box, window-relative, exclusive end
    std::vector<Word> words;

    WindowTemplate(const BinaryRaster& src, const SubWindow& win) : w(win.w), h(win.h) {
        auto pack = [](const BinaryRaster& m, int x0, int y0, int ww, int hh, std::vector<Word>& out) {
            for (int r = 0; r < hh; ++r)
                for (int k = 0; 64 * k < ww; ++k) {
                    std::uint64_t v = 0;
                    for (int b = 0; b < 64 && 64 * k + b < ww; ++b)
                        if (m.at(x0 + 64 * k + b, y0 + r)) v |= std::uint64_t{1} << b;
                    if (v) out.push_back({r, 64 * k, v});
                }
        };
        pack(src, win.x, win.y, win.w, win.h, words);
        x0 = w;
        y0 = h;
        for (const Word& wd : words) {
            y0 = std::min(y0, wd.row);
            y1 = std::max(y1, wd.row + 1);
            x0 = std::min(x0, wd.offset + std::countr_zero(wd.bits));
            x1 = std::max(x1, wd.offset + 64 - std::countl_zero(wd.bits));
        }
    }

    static std::size_t count(const std::vector<Word>& ws, const BitMatrix& target, int x, int y) {
        std::size_t n = 0;
        for (const Word& wd : ws) n += std::popcount(wd.bits & target.extract(y + wd.row, x + wd.offset));
        return n;
    }

    std::size_t hits(const BitMatrix& target, int x, int y) const { return count(words, target, x, y); }
};

struct Placement {
    int x = 0, y = 0;
    std::size_t dilated = 0, raw = 0;
};

// More dilated hits, then more exact hits, then smallest (y, x).
inline bool better(const Placement& a, const Placement& b) {
    if (a.dilated != b.dilated) return a.dilated > b.dilated;
    if (a.raw != b.raw) return a.raw > b.raw;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
}

}  // namespace detail

/// Target frame prepared for template search: the raw mask, its 3x3 dilation,
/// and the dilation max-filtered over a coarse_stride cell, which bounds the
/// dilated hits of every placement in a cell.
/// Placements may overhang the target by half a window; outside is empty.
class MatchTarget {
public:
    MatchTarget() = default;
    explicit MatchTarget(const BinaryRaster& raw, int coarse_stride = 4)
        : raw_(raw, kPadWords), stride_(std::max(1, coarse_stride)) {
        const BinaryRaster dil = dilate(raw, 1);
        dilated_ = BitMatrix(dil, kPadWords);
        const BinaryRaster cell = detail::trailing_max(dil, stride_);
        cell_ = BitMatrix(cell, kPadWords);
        cw_ = cell.width();
        ch_ = cell.height();
        integral_.assign(static_cast<std::size_t>(cw_ + 1) * (ch_ + 1), 0);
        const std::uint8_t* px = cell.data().data();
        for (int y = 0; y < ch_; ++y) {
            std::size_t run = 0;
            for (int x = 0; x < cw_; ++x) {
                run += px[y * cw_ + x];
                integral_[(y + 1) * (cw_ + 1) + x + 1] = integral_[y * (cw_ + 1) + x + 1] + run;
            }
        }
    }

    static constexpr int kPadWords = 2;

    int width() const { return raw_.width(); }
    int height() const { return raw_.height(); }
    int stride() const { return stride_; }
    const BitMatrix& raw() const { return raw_; }
    const BitMatrix& dilated() const { return dilated_; }

    /// Upper bound on dilated hits for placements in [x, x + stride) x [y, y + stride).
    std::size_t cell_bound(const detail::WindowTemplate& tmpl, int x, int y) const {
        return tmpl.hits(cell_, x + stride_ - 1, y + stride_ - 1);
    }

    /// Cheaper, looser bound: cell-mask pixels under the widened window.
    std::size_t cell_area_bound(int x, int y, int w, int h) const {
        x += stride_ - 1;
        y += stride_ - 1;
        const int x0 = std::clamp(x, 0, cw_), x1 = std::clamp(x + w, 0, cw_);
        const int y0 = std::clamp(y, 0, ch_), y1 = std::clamp(y + h, 0, ch_);
        return integral_[y1 * (cw_ + 1) + x1] - integral_[y0 * (cw_ + 1) + x1] - integral_[y1 * (cw_ + 1) + x0] +
               integral_[y0 * (cw_ + 1) + x0];
    }

private:
    BitMatrix raw_, dilated_, cell_;
    int stride_ = 4, cw_ = 0, ch_ = 0;
    std::vector<std::size_t> integral_;
};

/// Up to two windows per vertical strip: the first grid placement holding
/// between cc_low and cc_high content, scanning top-down and then bottom-up.
inline std::vector<SubWindow> select_windows(const BinaryRaster& content, const MatchConfig& cfg = {}) {
    const int W = content.width(), H = content.height();
    const int h = std::max(1, H / cfg.window_rows);
    const int w = 2 * h;
    if (w > W || h > H) return {};
    const int sy = std::max(1, h / 2), sx = std::max(1, w / 2);
    const double low = cfg.cc_low * w * h, high = cfg.cc_high * w * h;

    std::vector<std::size_t> integral(static_cast<std::size_t>(W + 1) * (H + 1), 0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            integral[(y + 1) * (W + 1) + x + 1] = integral[y * (W + 1) + x + 1] + integral[(y + 1) * (W + 1) + x] -
                                                  integral[y * (W + 1) + x] + content.at(x, y);
    auto count = [&](int x, int y) {
        return integral[(y + h) * (W + 1) + x + w] - integral[y * (W + 1) + x + w] - integral[(y + h) * (W + 1) + x] +
               integral[y * (W + 1) + x];
    };

    std::vector<int> rows;
    for (int y = 0; y + h <= H; y += sy) rows.push_back(y);

    std::vector<SubWindow> out;
    for (int s = 0; s < 3; ++s) {
        const int x0 = s * W / 3, x1 = (s + 1) * W / 3;
        std::vector<int> cols;
        for (int x = x0; x + w <= x1; x += sx) cols.push_back(x);
        if (cols.empty() && x0 + w <= W) cols.push_back(x0);

        auto scan = [&](bool top_down) -> std::optional<SubWindow> {
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const int y = top_down ? rows[k] : rows[rows.size() - 1 - k];
                for (int x : cols) {
                    const std::size_t cc = count(x, y);
                    if (cc >= low && cc <= high) return SubWindow{x, y, w, h, cc};
                }
            }
            return std::nullopt;
        };
        const auto top = scan(true);
        const auto bottom = scan(false);
        if (top) out.push_back(*top);
        if (bottom && (!top || !(*bottom == *top))) out.push_back(*bottom);
    }
    return out;
}

namespace detail {

struct PlacementRange {
    int min_x, max_x, min_y, max_y;
};

// top-left positions keeping the window's content inside the target
inline PlacementRange placement_range(const WindowTemplate& tmpl, const MatchTarget& target) {
    const int pad = target.raw().pad_bits();
    return {std::max(-tmpl.x0, -pad), std::min(target.width() - tmpl.x1, target.width() - tmpl.w + pad), -tmpl.y0,
            target.height() - tmpl.y1};
}

inline WindowCorrespondence best_placement(const SubWindow& win, const WindowTemplate& tmpl, const MatchTarget& target,
                                           const MatchConfig& cfg) {
    WindowCorrespondence out;
    out.source = win;
    const auto [min_x, max_x, min_y, max_y] = placement_range(tmpl, target);
    if (max_x < min_x || max_y < min_y || win.cc == 0) return out;

    auto eval = [&](int x, int y) {
        return Placement{x, y, tmpl.hits(target.dilated(), x, y), tmpl.hits(target.raw(), x, y)};
    };

    Placement best{min_x, min_y, 0, 0};
    bool have = false;
    auto consider = [&](const Placement& p) {
        if (!have || better(p, best)) {
            best = p;
            have = true;
        }
    };

    const int span_x = max_x - min_x + 1;
    const std::size_t placements = static_cast<std::size_t>(span_x) * (max_y - min_y + 1);
    if (placements <= cfg.exhaustive_max_placements) {
        for (int y = min_y; y <= max_y; ++y)
            for (int x = min_x; x <= max_x; ++x) consider(eval(x, y));
    } else {
        // best-first over cells; a cell whose bound cannot beat the best is never refined
        struct Cell {
            int x, y;
            std::size_t bound;
        };
        const int st = target.stride();
        // the untranslated placement seeds the best, pruning cells that cannot reach it
        consider(eval(std::clamp(win.x, min_x, max_x), std::clamp(win.y, min_y, max_y)));
        const auto needed =
            std::max(static_cast<std::size_t>(std::ceil(cfg.q_min * double(win.cc))), best.dilated);
        std::vector<Cell> cells;
        for (int y = min_y; y <= max_y; y += st)
            for (int x = min_x; x <= max_x; x += st) {
                if (target.cell_area_bound(x, y, win.w, win.h) < needed) continue;
                const std::size_t bound = target.cell_bound(tmpl, x, y);
                if (bound >= needed) cells.push_back({x, y, bound});
            }
        std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.bound > b.bound; });
        const std::size_t budget = std::min(cells.size(), static_cast<std::size_t>(cfg.coarse_candidates));
        for (std::size_t c = 0; c < budget; ++c) {
            if (have && cells[c].bound < best.dilated) break;
            for (int y = cells[c].y; y <= std::min(max_y, cells[c].y + st - 1); ++y)
                for (int x = cells[c].x; x <= std::min(max_x, cells[c].x + st - 1); ++x) consider(eval(x, y));
        }
    }
    out.target_x = best.x;
    out.target_y = best.y;
    out.quality = double(best.dilated) / double(win.cc);
    out.dx = best.x - win.x;
    out.dy = best.y - win.y;
    return out;
}

}  // namespace detail

/// Best placement of a source window inside the (dilated) target.
inline WindowCorrespondence match_window(const SubWindow& win, const BinaryRaster& source, const MatchTarget& target,
                                         const MatchConfig& cfg = {}) {
    return detail::best_placement(win, detail::WindowTemplate(source, win), target, cfg);
}

namespace detail {

inline double population_stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / double(v.size()));
}

}  // namespace detail

/// Weighted match score over correspondences that already passed q_min.
/// `scale` relates distances in the target to distances in the source.
inline MatchScore score_match(const std::vector<WindowCorrespondence>& matched, double diag,
                              const MatchConfig& cfg = {}, double scale = 1.0) {
    MatchScore s;
    s.n_matched = static_cast<int>(matched.size());
    if (matched.empty()) return s;
    for (const auto& c : matched) s.q_mean += c.quality;
    s.q_mean /= double(matched.size());

    if (matched.size() >= 2) {
        std::vector<double> lengths;
        for (const auto& c : matched) lengths.push_back(std::hypot(c.dx, c.dy));
        s.sigma_trans = detail::population_stddev(lengths);

        std::vector<double> errors;
        for (std::size_t a = 0; a < matched.size(); ++a)
            for (std::size_t b = a + 1; b < matched.size(); ++b) {
                const auto& A = matched[a];
                const auto& B = matched[b];
                const double di = std::hypot(double(A.source.x - B.source.x), double(A.source.y - B.source.y));
                const double dj = std::hypot(double(A.target_x - B.target_x), double(A.target_y - B.target_y));
                errors.push_back(std::abs(dj - scale * di));
            }
        s.sigma_spatial = detail::population_stddev(errors);
    }

    const double tau = cfg.tau_frac * diag;
    s.score = cfg.w_n * (s.n_matched / 6.0) + cfg.w_q * s.q_mean + cfg.w_t * std::exp(-s.sigma_trans / tau) +
              cfg.w_s * std::exp(-s.sigma_spatial / tau);
    s.accepted = s.n_matched >= 2 && s.score >= cfg.score_threshold;
    return s;
}

namespace detail {

// Highest score reachable if the `remaining` unsearched windows all matched
// perfectly at the mean translation; adding values never lowers a variance
// below n/(n+r) of its current value.
inline double score_upper_bound(const std::vector<WindowCorrespondence>& matched, int remaining, double diag,
                                const MatchConfig& cfg) {
    const int n = static_cast<int>(matched.size());
    const int total = n + remaining;
    if (total < 2) return 0.0;
    const MatchScore cur = score_match(matched, diag, cfg);
    const double q = (cur.q_mean * n + remaining) / total;
    const double tau = cfg.tau_frac * diag;
    const double pairs = n * (n - 1) / 2.0, pairs_total = total * (total - 1) / 2.0;
    const double st = n >= 2 ? cur.sigma_trans * std::sqrt(double(n) / total) : 0.0;
    const double ss = n >= 2 ? cur.sigma_spatial * std::sqrt(pairs / pairs_total) : 0.0;
    return cfg.w_n * (total / 6.0) + cfg.w_q * q + cfg.w_t * std::exp(-st / tau) + cfg.w_s * std::exp(-ss / tau);
}

}  // namespace detail

/// Content frame with its windows and per-scale search targets computed on
/// first use. Not safe for concurrent use.
class PreparedFrame {
public:
    PreparedFrame(BinaryRaster content, const MatchConfig& cfg) : content_(std::move(content)), cfg_(&cfg) {}

    const BinaryRaster& content() const { return content_; }

    const std::vector<SubWindow>& windows() {
        if (!windows_) {
            windows_ = select_windows(content_, *cfg_);
            templates_.clear();
            for (const auto& w : *windows_) templates_.emplace_back(content_, w);
        }
        return *windows_;
    }

    const std::vector<detail::WindowTemplate>& templates() {
        windows();
        return templates_;
    }

    const MatchTarget& target(double scale) {
        auto it = targets_.find(scale);
        if (it == targets_.end()) {
            auto t = std::make_unique<MatchTarget>(scale == 1.0 ? content_ : rescale_nearest(content_, scale),
                                                   cfg_->coarse_stride);
            it = targets_.emplace(scale, std::move(t)).first;
        }
        return *it->second;
    }

    double diagonal() const { return std::hypot(double(content_.width()), double(content_.height())); }

    void release_targets() { targets_.clear(); }

private:
    BinaryRaster content_;
    const MatchConfig* cfg_;
    std::optional<std::vector<SubWindow>> windows_;
    std::vector<detail::WindowTemplate> templates_;
    std::map<double, std::unique_ptr<MatchTarget>> targets_;
};

/// Does `newer` elaborate `older`? Windows come from `older`; `newer` is
/// rescaled along the ladder until a score is accepted.
inline MatchResult match_frames(PreparedFrame& older, PreparedFrame& newer, const MatchConfig& cfg = {}) {
    MatchResult best;
    const auto& windows = older.windows();
    best.n_windows_found = static_cast<int>(windows.size());
    if (windows.empty()) return best;
    const auto& templates = older.templates();
    bool have = false;
    int tried = 0;
    for (double s : cfg.scales) {
        ++tried;
        const MatchTarget& target = newer.target(s);
        MatchResult r;
        r.n_windows_found = best.n_windows_found;
        r.scale = s;
        std::vector<WindowCorrespondence> matched;
        for (std::size_t k = 0; k < windows.size(); ++k) {
            auto c = detail::best_placement(windows[k], templates[k], target, cfg);
            if (c.quality >= cfg.q_min) matched.push_back(c);
            r.correspondences.push_back(c);
            const int remaining = static_cast<int>(windows.size() - k - 1);
            if (cfg.early_reject && remaining > 0 &&
                detail::score_upper_bound(matched, remaining, older.diagonal(), cfg) < cfg.score_threshold)
                break;  // this scale cannot be accepted
        }
        const MatchScore sc = score_match(matched, older.diagonal(), cfg);
        r.n_matched = sc.n_matched;
        r.q_mean = sc.q_mean;
        r.sigma_trans = sc.sigma_trans;
        r.sigma_spatial = sc.sigma_spatial;
        r.score = sc.score;
        r.accepted = sc.accepted;
        if (r.accepted) {
            r.scales_tried = tried;
            return r;
        }
        if (!have || r.score > best.score) {
            best = std::move(r);
            have = true;
        }
    }
    best.scales_tried = tried;
    return best;
}

inline MatchResult match_frames(const BinaryRaster& older, const BinaryRaster& newer, const MatchConfig& cfg = {}) {
    PreparedFrame a(older, cfg), b(newer, cfg);
    return match_frames(a, b, cfg);
}

}  // namespace lectureseg
