#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <lectureseg/content_filter.hpp>
#include <lectureseg/matcher.hpp>
#include <lectureseg/synth.hpp>

#include "support.hpp"

using namespace lectureseg;
using namespace testing_support;

namespace {

// blocks of varying density so that only some grid windows qualify
BinaryRaster patchy_mask(std::mt19937_64& rng, int w, int h) {
    BinaryRaster m(w, h);
    std::uniform_real_distribution<double> u(0, 1);
    for (int by = 0; by < h; by += 8)
        for (int bx = 0; bx < w; bx += 8) {
            const double d = u(rng) < 0.5 ? 0.0 : 0.5 * u(rng);
            for (int y = by; y < std::min(h, by + 8); ++y)
                for (int x = bx; x < std::min(w, bx + 8); ++x) m.set(x, y, u(rng) < d);
        }
    return m;
}

BinaryRaster board_content(std::uint64_t seed) {
    synth::GenOptions opt;
    opt.scale = 2;
    return derive_content(synth::gen_frame(MediaType::Board, seed, opt).raster, MediaType::Board);
}

// short chalk strokes added where the frame is empty
BinaryRaster with_strokes(BinaryRaster m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 8; ++k) {
        const int x0 = static_cast<int>(rng() % (m.width() - 40)), y0 = static_cast<int>(rng() % (m.height() - 3));
        if (m.count_in(x0, y0, 40, 3) > 0) continue;
        for (int y = y0; y < y0 + 3; ++y)
            for (int x = x0; x < x0 + 40; ++x) m.set(x, y);
    }
    return m;
}

WindowCorrespondence corr(int sx, int sy, int dx, int dy, double q = 1.0) {
    WindowCorrespondence c;
    c.source = SubWindow{sx, sy, 16, 8, 20};
    c.dx = dx;
    c.dy = dy;
    c.target_x = sx + dx;
    c.target_y = sy + dy;
    c.quality = q;
    return c;
}

}  // namespace

TEST(SelectWindows, BlankFrameHasNone) {
    EXPECT_TRUE(select_windows(BinaryRaster(640, 480)).empty());
    BinaryRaster full(640, 480);
    for (int y = 0; y < 480; ++y)
        for (int x = 0; x < 640; ++x) full.set(x, y);
    EXPECT_TRUE(select_windows(full).empty());
}

TEST(SelectWindows, AgreesWithGridScan) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        const int w = 64 + static_cast<int>(rng() % 200), h = 48 + static_cast<int>(rng() % 150);
        const BinaryRaster m = patchy_mask(rng, w, h);
        const auto got = select_windows(m);
        const auto want = grid_scan_oracle(m);
        ASSERT_EQ(got.size(), want.size()) << w << "x" << h;
        for (std::size_t k = 0; k < got.size(); ++k) EXPECT_EQ(got[k], want[k]);
        EXPECT_LE(got.size(), 6u);
    }
}

TEST(SelectWindows, WindowGeometry) {
    std::mt19937_64 rng(22);
    const BinaryRaster m = random_mask(rng, 640, 480, 0.1);
    const auto wins = select_windows(m);
    ASSERT_EQ(wins.size(), 6u);
    for (const auto& w : wins) {
        EXPECT_EQ(w.h, 60);
        EXPECT_EQ(w.w, 120);
        EXPECT_EQ(w.cc, m.count_in(w.x, w.y, w.w, w.h));
    }
}

TEST(MatchWindow, EqualsExhaustiveSearchOnSmallFixtures) {
    std::mt19937_64 rng(23);
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const BinaryRaster src = patchy_mask(rng, 64, 64);
        BinaryRaster tgt = translate(src, static_cast<int>(rng() % 13) - 6, static_cast<int>(rng() % 13) - 6);
        const BinaryRaster noise = random_mask(rng, 64, 64, 0.03);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (noise.at(x, y)) tgt.set(x, y, !tgt.at(x, y));
        const MatchTarget target(tgt);
        for (const auto& win : select_windows(src)) {
            const auto got = match_window(win, src, target);
            const auto want = exhaustive_search(src, win, tgt);
            EXPECT_EQ(got.target_x, want.x);
            EXPECT_EQ(got.target_y, want.y);
            EXPECT_DOUBLE_EQ(got.quality, double(want.dilated) / double(win.cc));
            ++compared;
        }
    }
    EXPECT_GT(compared, 200);
}

TEST(MatchWindow, CoarseSearchFindsTranslatedContent) {
    // large frames go through the bounded cell search
    std::mt19937_64 rng(24);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const BinaryRaster src = board_content(seed);
        const int dx = static_cast<int>(rng() % 41) - 20, dy = static_cast<int>(rng() % 21) - 10;
        const BinaryRaster tgt = translate(src, dx, dy);
        const MatchTarget target(tgt);
        for (const auto& win : select_windows(src)) {
            if (win.x + dx < 0 || win.y + dy < 0 || win.x + dx + win.w > 640 || win.y + dy + win.h > 480) continue;
            const auto got = match_window(win, src, target);
            const auto want = exhaustive_search(src, win, tgt);
            EXPECT_DOUBLE_EQ(got.quality, double(want.dilated) / double(win.cc)) << "seed " << seed;
            EXPECT_DOUBLE_EQ(got.quality, 1.0);
        }
    }
}

TEST(MatchWindow, RecoversTranslation) {
    const BinaryRaster src = board_content(5);
    const MatchTarget target(translate(src, 12, 4));
    const auto wins = select_windows(src);
    ASSERT_FALSE(wins.empty());
    for (const auto& win : wins) {
        if (win.x + 12 + win.w > 640 || win.y + 4 + win.h > 480) continue;
        const auto c = match_window(win, src, target);
        EXPECT_EQ(c.dx, 12);
        EXPECT_EQ(c.dy, 4);
        EXPECT_DOUBLE_EQ(c.quality, 1.0);
    }
}

TEST(Score, TranslationSpreadExample) {
    const auto s = score_match({corr(0, 0, 10, 0), corr(100, 0, 10, 0), corr(200, 0, 16, 0)}, 800);
    EXPECT_NEAR(s.sigma_trans, std::sqrt(8.0), 1e-12);
    EXPECT_NEAR(s.sigma_trans, stddev_oracle({10, 10, 16}), 1e-12);
}

TEST(Score, FourConsistentWindows) {
    const std::vector<WindowCorrespondence> m{corr(0, 0, 5, 3), corr(200, 0, 5, 3), corr(0, 300, 5, 3),
                                              corr(200, 300, 5, 3)};
    const auto s = score_match(m, 800);
    EXPECT_EQ(s.n_matched, 4);
    EXPECT_DOUBLE_EQ(s.sigma_trans, 0.0);
    EXPECT_DOUBLE_EQ(s.sigma_spatial, 0.0);
    EXPECT_NEAR(s.score, 0.25 * 4 / 6 + 0.45 + 0.15 + 0.15, 1e-12);
    EXPECT_TRUE(s.accepted);
}

TEST(Score, SingleWindowNeverAccepted) {
    const auto s = score_match({corr(0, 0, 0, 0)}, 800);
    EXPECT_FALSE(s.accepted);
    EXPECT_FALSE(score_match({}, 800).accepted);
}

TEST(Score, DecreasesAsTranslationsSpread) {
    double prev = 2.0;
    for (int spread = 0; spread <= 40; spread += 4) {
        const auto s = score_match({corr(0, 0, 10, 0), corr(100, 0, 10 + spread, 0), corr(200, 0, 10, 0),
                                    corr(300, 0, 10 + spread, 0)},
                                   800);
        EXPECT_LT(s.score, prev + 1e-15);
        prev = s.score;
    }
}

TEST(Score, EarlyRejectBoundIsAnUpperBound) {
    std::mt19937_64 rng(25);
    MatchConfig cfg;
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);  // a single window is never accepted
        std::vector<WindowCorrespondence> all;
        for (int k = 0; k < n; ++k)
            all.push_back(corr(static_cast<int>(rng() % 600), static_cast<int>(rng() % 400),
                               static_cast<int>(rng() % 30) - 15, static_cast<int>(rng() % 30) - 15,
                               0.5 + 0.5 * double(rng() % 1000) / 999.0));
        const int prefix = static_cast<int>(rng() % (n + 1));
        const std::vector<WindowCorrespondence> head(all.begin(), all.begin() + prefix);
        const std::size_t keep = prefix + rng() % (n - prefix + 1);
        const std::vector<WindowCorrespondence> some(all.begin(), all.begin() + keep);
        EXPECT_GE(detail::score_upper_bound(head, n - prefix, 800, cfg) + 1e-12, score_match(some, 800, cfg).score);
    }
}

TEST(MatchFrames, SelfMatchIsAccepted) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const BinaryRaster c = board_content(seed);
        const auto r = match_frames(c, c);
        EXPECT_TRUE(r.accepted) << "seed " << seed;
        EXPECT_DOUBLE_EQ(r.q_mean, 1.0);
        EXPECT_DOUBLE_EQ(r.sigma_trans, 0.0);
        EXPECT_DOUBLE_EQ(r.sigma_spatial, 0.0);
        EXPECT_EQ(r.scales_tried, 1);
    }
}

TEST(MatchFrames, ShiftedByAQuarterFrame) {
    // content kept inside the central half so every shift stays within the frame
    const std::vector<std::pair<int, int>> shifts{{160, 0}, {-160, 0}, {0, 120}, {0, -120},
                                                  {-40, 30}, {100, -80}, {160, 120}, {-160, -120}};
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const BinaryRaster full = board_content(seed);
        BinaryRaster c(640, 480);
        for (int y = 120; y < 360; ++y)
            for (int x = 160; x < 480; ++x) c.set(x, y, full.at(x, y));
        for (const auto& [dx, dy] : shifts) {
            const auto r = match_frames(c, translate(c, dx, dy));
            EXPECT_TRUE(r.accepted) << "seed " << seed << " shift " << dx << "," << dy;
            EXPECT_DOUBLE_EQ(r.scale, 1.0);
            for (const auto& m : r.correspondences) {
                EXPECT_EQ(m.dx, dx);
                EXPECT_EQ(m.dy, dy);
            }
        }
    }
}

TEST(MatchFrames, ZoomedCopiesWithAdditions) {
    for (double s : {0.7, 1.0, 1.4}) {
        const BinaryRaster c = board_content(6);
        const auto r = match_frames(c, with_strokes(rescale_nearest(c, s), 7));
        EXPECT_TRUE(r.accepted) << "scale " << s;
    }
}

TEST(MatchFrames, RecoversZoomWithinOneLadderStep) {
    const BinaryRaster c = board_content(7);
    const auto r = match_frames(c, with_strokes(rescale_nearest(c, 1.26), 8));
    ASSERT_TRUE(r.accepted);
    std::vector<double> ladder = MatchConfig{}.scales;
    std::sort(ladder.begin(), ladder.end());
    auto step = [&](double v) {
        return std::min_element(ladder.begin(), ladder.end(),
                                [&](double a, double b) { return std::abs(a - v) < std::abs(b - v); }) -
               ladder.begin();
    };
    EXPECT_LE(std::abs(step(r.scale) - step(1.0 / 1.26)), 1) << r.scale;
}

TEST(MatchFrames, UnrelatedBoardsRarelyAccepted) {
    int accepted = 0, pairs = 0;
    for (std::uint64_t a = 1; a <= 10; ++a)
        for (std::uint64_t b = a + 1; b <= a + 2; ++b) {
            accepted += match_frames(board_content(100 + a), board_content(100 + b)).accepted;
            ++pairs;
        }
    EXPECT_LE(accepted * 20, pairs) << accepted << " of " << pairs;
}

TEST(MatchFrames, EmptyOlderFrameHasNoWindows) {
    const auto r = match_frames(BinaryRaster(640, 480), board_content(1));
    EXPECT_EQ(r.n_windows_found, 0);
    EXPECT_FALSE(r.accepted);
}

TEST(MatchConfig, ValidationRejectsBadLadders) {
    MatchConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.scales.pop_back();
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = MatchConfig{};
    cfg.scales[3] = 1.9;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = MatchConfig{};
    cfg.w_q = 0.5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
