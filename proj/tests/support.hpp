#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <lectureseg/cluster.hpp>
#include <lectureseg/core.hpp>
#include <lectureseg/image.hpp>
#include <lectureseg/matcher.hpp>
#include <lectureseg/synth.hpp>

namespace testing_support {

using namespace lectureseg;

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("lectureseg_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline BinaryRaster random_mask(std::mt19937_64& rng, int w, int h, double density) {
    std::bernoulli_distribution on(density);
    BinaryRaster m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, on(rng));
    return m;
}

// pixel is set if any pixel of its (2r+1)^2 neighbourhood is set
inline BinaryRaster naive_dilate(const BinaryRaster& in, int r) {
    BinaryRaster out(in.width(), in.height());
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x) {
            bool any = false;
            for (int dy = -r; dy <= r && !any; ++dy)
                for (int dx = -r; dx <= r && !any; ++dx) any = in.get_or(x + dx, y + dy, false);
            out.set(x, y, any);
        }
    return out;
}

// outside the image counts as set
inline BinaryRaster naive_erode(const BinaryRaster& in, int r) {
    BinaryRaster out(in.width(), in.height());
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x) {
            bool all = true;
            for (int dy = -r; dy <= r && all; ++dy)
                for (int dx = -r; dx <= r && all; ++dx) all = in.get_or(x + dx, y + dy, true);
            out.set(x, y, all);
        }
    return out;
}

struct OraclePlacement {
    int x = 0, y = 0;
    std::size_t dilated = 0, raw = 0;
};

// Exhaustive stride-1 template search: every top-left position that keeps
// at least half the window inside the target, scored pixel by pixel.
inline OraclePlacement exhaustive_search(const BinaryRaster& source, const SubWindow& win, const BinaryRaster& target) {
    const BinaryRaster blurred = naive_dilate(target, 1);
    OraclePlacement best;
    bool have = false;
    // placements keep the window's content bounding box inside the target
    int bx0 = win.w, by0 = win.h, bx1 = 0, by1 = 0;
    for (int v = 0; v < win.h; ++v)
        for (int u = 0; u < win.w; ++u)
            if (source.at(win.x + u, win.y + v)) {
                bx0 = std::min(bx0, u);
                by0 = std::min(by0, v);
                bx1 = std::max(bx1, u + 1);
                by1 = std::max(by1, v + 1);
            }
    for (int y = -by0; y <= target.height() - by1; ++y)
        for (int x = -bx0; x <= target.width() - bx1; ++x) {
            OraclePlacement p{x, y, 0, 0};
            for (int v = 0; v < win.h; ++v)
                for (int u = 0; u < win.w; ++u) {
                    if (!source.at(win.x + u, win.y + v)) continue;
                    p.dilated += blurred.get_or(x + u, y + v, false);
                    p.raw += target.get_or(x + u, y + v, false);
                }
            const bool better = !have || p.dilated > best.dilated ||
                                (p.dilated == best.dilated && p.raw > best.raw);
            if (better) {
                best = p;
                have = true;
            }
        }
    return best;
}

// top-down then bottom-up scan of every grid position, per strip
inline std::vector<SubWindow> grid_scan_oracle(const BinaryRaster& content, const MatchConfig& cfg = {}) {
    const int W = content.width(), H = content.height();
    const int h = std::max(1, H / cfg.window_rows), w = 2 * h;
    std::vector<SubWindow> out;
    if (w > W) return out;
    for (int s = 0; s < 3; ++s) {
        const int x0 = s * W / 3, x1 = (s + 1) * W / 3;
        std::vector<int> xs;
        for (int x = x0; x + w <= x1; x += std::max(1, w / 2)) xs.push_back(x);
        // a strip narrower than the window still gets one column at its left edge
        if (xs.empty() && x0 + w <= W) xs.push_back(x0);
        std::vector<SubWindow> found;
        for (int y = 0; y + h <= H; y += std::max(1, h / 2))
            for (int x : xs) {
                const std::size_t cc = content.count_in(x, y, w, h);
                if (cc >= cfg.cc_low * w * h && cc <= cfg.cc_high * w * h) found.push_back({x, y, w, h, cc});
            }
        if (found.empty()) continue;
        out.push_back(found.front());
        // bottom-up: last row holding a qualifying window, leftmost in that row
        SubWindow last = found.back();
        for (const auto& f : found)
            if (f.y == last.y) {
                last = f;
                break;
            }
        if (!(last == found.front())) out.push_back(last);
    }
    return out;
}

inline double stddev_oracle(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= double(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size()));
}

// (a, b) minimising sum (m - a f - b f^2)^2 via the 2x2 normal equations
inline std::pair<double, double> normal_equations_fit(const std::vector<std::pair<double, double>>& pts) {
    long double s2 = 0, s3 = 0, s4 = 0, t1 = 0, t2 = 0;
    for (const auto& [f, m] : pts) {
        const long double F = f;
        s2 += F * F;
        s3 += F * F * F;
        s4 += F * F * F * F;
        t1 += F * m;
        t2 += F * F * m;
    }
    const long double det = s2 * s4 - s3 * s3;
    return {static_cast<double>((t1 * s4 - t2 * s3) / det), static_cast<double>((s2 * t2 - s3 * t1) / det)};
}

// The published 323-frame topic string, as (label, length, label source) runs.
struct FixtureRun {
    const char* label;
    int length;
    LabelSource source;
};

inline const std::vector<FixtureRun>& fig6_runs() {
    using L = LabelSource;
    static const std::vector<FixtureRun> runs = {
        {"X", 1, L::Filename}, {"X", 2, L::Visual}, {"Y", 6, L::Visual},   {"A", 1, L::Visual},
        {"X", 10, L::Visual},  {"B", 8, L::Visual}, {"X", 3, L::Visual},   {"Y", 1, L::Filename},
        {"Y", 1, L::Visual},   {"C", 29, L::Visual}, {"X", 12, L::Visual}, {"D", 11, L::Visual},
        {"E", 21, L::Visual},  {"F", 15, L::Visual}, {"G", 28, L::Visual}, {"X", 16, L::Visual},
        {"Y", 1, L::Visual},   {"H", 7, L::Visual}, {"I", 42, L::Visual},  {"X", 4, L::Visual},
        {"I", 5, L::Visual},   {"X", 1, L::Visual}, {"H", 2, L::Visual},   {"I", 8, L::Visual},
        {"X", 10, L::Visual},  {"J", 14, L::Visual}, {"X", 1, L::Visual},  {"K", 7, L::Visual},
        {"J", 1, L::Visual},   {"K", 6, L::Visual}, {"J", 2, L::Visual},   {"K", 11, L::Visual},
        {"J", 5, L::Visual},   {"X", 6, L::Visual}, {"J", 5, L::Visual},   {"H", 3, L::Visual},
        {"I", 1, L::Visual},   {"X", 1, L::Visual}, {"Y", 13, L::Visual},  {"X", 1, L::PostProcess},
        {"X", 1, L::Filename},
    };
    return runs;
}

inline const char* kFig6String =
    "X^1 X^2 Y^6 A^1 X^10 B^8 X^3 Y^1 Y^1 C^29 X^12 D^11 E^21 F^15 G^28 X^16 Y^1 H^7 I^42 X^4 I^5 X^1 H^2 I^8 "
    "X^10 J^14 X^1 K^7 J^1 K^6 J^2 K^11 J^5 X^6 J^5 H^3 I^1 X^1 Y^13 X^1 X^1";

// Frames of the fixture plus a board clustering produced by a matcher that
// accepts exactly the pairs sharing a letter.
struct Fig6Fixture {
    std::vector<KeyFrame> frames;
    std::vector<std::size_t> board_frames;
    ClusterResult board;
};

inline Fig6Fixture fig6_fixture() {
    Fig6Fixture fx;
    std::vector<std::string> letters;
    for (const auto& run : fig6_runs())
        for (int k = 0; k < run.length; ++k) {
            KeyFrame f;
            f.seq = static_cast<int>(fx.frames.size());
            char id[16];
            std::snprintf(id, sizeof id, "%04d", f.seq + 1);
            f.id = id;
            f.source_path = f.id + ".png";
            f.timestamp_s = f.seq * 22.5;
            const std::string label = run.label;
            f.label_source = run.source;
            if (label == "X") {
                f.media_type = MediaType::Podium;
            } else if (label == "Y") {
                f.media_type = MediaType::Computer;
            } else {
                f.media_type = MediaType::Board;
                fx.board_frames.push_back(fx.frames.size());
                letters.push_back(label);
            }
            fx.frames.push_back(std::move(f));
        }
    fx.board = cluster_sequence(
        letters.size(), [&](std::size_t a, std::size_t b) { return PairOutcome{letters[a] == letters[b], 1.0}; },
        [](std::size_t) { return true; });
    return fx;
}

}  // namespace testing_support
