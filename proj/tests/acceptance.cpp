#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <lectureseg/pipeline.hpp>

#include "support.hpp"

using namespace lectureseg;
using testing_support::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    failures += !pass;
}

unsigned max_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct ClassificationResult {
    int total = 0, correct = 0;
    int dark_total = 0, dark_correct = 0;
    int bp_total = 0, bp_correct = 0;
    std::map<MediaType, std::map<MediaType, int>> confusion;
    double seconds = 0;
};

ClassificationResult run_classification() {
    const MediaType types[] = {MediaType::Board, MediaType::Podium, MediaType::Sheet, MediaType::Illustration,
                               MediaType::Computer};
    ClassificationResult r;
    const auto t0 = Clock::now();
    synth::GenOptions opt;
    opt.scale = 2;
    for (MediaType m : types)
        for (int k = 0; k < 100; ++k) {
            const auto g = synth::gen_frame(m, 20000 + 100 * static_cast<std::uint64_t>(m) + k, opt);
            const MediaType got = classify(g.raster).type;
            const bool ok = got == m;
            ++r.total;
            r.correct += ok;
            ++r.confusion[m][got];
            if (g.dark_or_bordered) {
                ++r.dark_total;
                r.dark_correct += ok;
            }
            if (m == MediaType::Board || m == MediaType::Podium) {
                ++r.bp_total;
                r.bp_correct += ok;
            }
        }
    r.seconds = seconds_since(t0);
    return r;
}

struct LectureSpec {
    synth::Profile profile;
    std::string name;
    int frames;
    std::uint64_t seed;
};

struct LectureResult {
    LectureSpec spec;
    int truth_topics = 0, got_topics = 0, clustered = 0, truth_clustered = 0, decision_errors = 0;
    double rand_index = 1;
    std::vector<std::string> violations;
    bool postprocess_idempotent = true;
    double seconds = 0;
};

double rand_index(const std::vector<long>& truth, const std::vector<long>& got) {
    long agree = 0, pairs = 0;
    for (std::size_t a = 0; a < truth.size(); ++a)
        for (std::size_t b = a + 1; b < truth.size(); ++b) {
            ++pairs;
            agree += (truth[a] == truth[b]) == (got[a] == got[b]);
        }
    return pairs ? double(agree) / double(pairs) : 1.0;
}

bool same_labels(const std::vector<ClassifiedFrame>& a, const std::vector<ClassifiedFrame>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k].type != b[k].type || a[k].source != b[k].source) return false;
    return true;
}

bool postprocess_is_idempotent(const synth::Lecture& lec, const ClassifierConfig& cfg) {
    std::vector<ClassifiedFrame> raw(lec.frames.size());
    parallel_for(lec.frames.size(), max_threads(), [&](std::size_t k) {
        KeyFrame f;
        f.name_hint = lec.truth[k].variant == synth::FrameVariant::Title   ? NameHint::Title
                      : lec.truth[k].variant == synth::FrameVariant::Slide ? NameHint::Slide
                                                                           : NameHint::None;
        raw[k] = classify(lec.frames[k], preclassify_by_name(f).media_type, cfg);
    });
    const auto tail = postprocess_tail(raw, cfg);
    const auto runs = postprocess_computer_runs(raw, cfg);
    return same_labels(postprocess_tail(tail, cfg), tail) && same_labels(postprocess_computer_runs(runs, cfg), runs);
}

LectureResult run_lecture(const LectureSpec& spec, const fs::path& dir, SegmentOutput* keep = nullptr) {
    LectureResult r;
    r.spec = spec;
    const auto t0 = Clock::now();
    const synth::Lecture lec = synth::gen_lecture(synth::make_script(spec.profile, spec.frames, spec.seed));
    write_lecture(lec, dir, spec.name, max_threads());
    PipelineConfig cfg;
    cfg.threads = max_threads();
    SegmentOutput out = segment_directory(dir, cfg);
    const TopicIndex& idx = out.index;

    r.truth_topics = lec.topics;
    r.got_topics = static_cast<int>(idx.topics.size());
    r.violations = validate_index(idx);
    std::map<int, std::size_t> first_member;  // topic id -> frame position
    for (std::size_t k = 0; k < idx.frames.size(); ++k) {
        r.clustered += is_clustered(idx.frames[k].media_type);
        if (idx.frames[k].topic_id && !first_member.count(*idx.frames[k].topic_id))
            first_member[*idx.frames[k].topic_id] = k;
    }

    std::vector<long> truth, got;
    std::set<int> seen_truth;
    for (std::size_t k = 0; k < lec.truth.size(); ++k) {
        const int t = lec.truth[k].topic;
        if (t < 0) continue;
        ++r.truth_clustered;
        const auto& pred = idx.frames[k].topic_id;
        truth.push_back(t);
        got.push_back(pred ? *pred : -1 - static_cast<long>(k));
        const bool truth_new = seen_truth.insert(t).second;
        bool error = true;
        if (pred) {
            const std::size_t first = first_member.at(*pred);
            error = first == k ? !truth_new : lec.truth[first].topic != t;
        }
        r.decision_errors += error;
    }
    r.rand_index = rand_index(truth, got);
    r.postprocess_idempotent = postprocess_is_idempotent(lec, cfg.classifier);
    r.seconds = seconds_since(t0);
    if (keep) *keep = std::move(out);
    return r;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) {
            std::ifstream in(e.path(), std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            files[fs::relative(e.path(), root).string()] = ss.str();
        }
    return files;
}

BinaryRaster board_content(std::uint64_t seed) {
    synth::GenOptions opt;
    opt.scale = 2;
    return derive_content(synth::gen_frame(MediaType::Board, seed, opt).raster, MediaType::Board);
}

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

std::string matcher_properties(bool& ok) {
    int self = 0, self_ok = 0, shift = 0, shift_ok = 0, zoom = 0, zoom_ok = 0;
    const std::vector<std::pair<int, int>> shifts{{160, 0}, {-160, 0}, {0, 120}, {0, -120}, {-40, 30}, {100, -80}};
    for (std::uint64_t seed = 40; seed < 48; ++seed) {
        const BinaryRaster c = board_content(seed);
        if (c.count() == 0) continue;
        const auto r = match_frames(c, c);
        ++self;
        self_ok += r.accepted && r.q_mean == 1.0 && r.sigma_trans == 0.0 && r.sigma_spatial == 0.0;

        BinaryRaster centre(c.width(), c.height());
        for (int y = c.height() / 4; y < 3 * c.height() / 4; ++y)
            for (int x = c.width() / 4; x < 3 * c.width() / 4; ++x) centre.set(x, y, c.at(x, y));
        for (const auto& [dx, dy] : shifts) {
            const auto m = match_frames(centre, testing_support::translate(centre, dx, dy));
            bool exact = m.accepted && m.scale == 1.0;
            for (const auto& w : m.correspondences) exact = exact && w.dx == dx && w.dy == dy;
            ++shift;
            shift_ok += exact;
        }
        for (double s : {0.7, 1.0, 1.4}) {
            ++zoom;
            zoom_ok += match_frames(c, with_strokes(rescale_nearest(c, s), seed)).accepted;
        }
    }
    ok = self > 0 && self_ok == self && shift_ok == shift && zoom_ok == zoom;
    return "self " + std::to_string(self_ok) + "/" + std::to_string(self) + ", translation " + std::to_string(shift_ok) +
           "/" + std::to_string(shift) + ", scale " + std::to_string(zoom_ok) + "/" + std::to_string(zoom);
}

bool rle_round_trips() {
    std::mt19937_64 rng(77);
    const std::vector<std::string> alphabet{"X", "Y", "A", "B", "Z", "AA", "AB", "I", "W"};
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::string> labels(rng() % 400);
        for (auto& l : labels) l = alphabet[rng() % alphabet.size()];
        const std::string s = rle_topic_string(std::span<const std::string>(labels));
        if (decode_topic_string(s) != labels) return false;
    }
    return true;
}

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

std::string oracle_equivalence(bool& ok) {
    std::mt19937_64 rng(2024);
    int fixtures = 0, windows = 0, mismatches = 0;
    while (fixtures < 200) {
        const int w = 24 + static_cast<int>(rng() % 41), h = 24 + static_cast<int>(rng() % 41);
        const BinaryRaster src = patchy_mask(rng, w, h);
        BinaryRaster tgt = testing_support::translate(src, static_cast<int>(rng() % 11) - 5,
                                                      static_cast<int>(rng() % 11) - 5);
        const BinaryRaster noise = testing_support::random_mask(rng, w, h, 0.04);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (noise.at(x, y)) tgt.set(x, y, !tgt.at(x, y));
        const auto wins = select_windows(src);
        if (wins.empty()) continue;
        ++fixtures;
        const MatchTarget target(tgt);
        for (const auto& win : wins) {
            const auto got = match_window(win, src, target);
            const auto want = testing_support::exhaustive_search(src, win, tgt);
            ++windows;
            mismatches += got.target_x != want.x || got.target_y != want.y ||
                          got.quality != double(want.dilated) / double(win.cc);
        }
    }

    int fits = 0;
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double a = 0.5 + double(rng() % 1000) / 1000.0, b = 0.001 + double(rng() % 1000) / 200000.0;
        std::normal_distribution<double> noise(0.0, 2.0);
        std::vector<std::pair<double, double>> pts;
        const int n = 20 + static_cast<int>(rng() % 300);
        for (int f = 1; f <= n; ++f) pts.emplace_back(f, a * f + b * f * f + noise(rng));
        const auto fit = fit_quadratic(pts);
        const auto [oa, ob] = testing_support::normal_equations_fit(pts);
        worst = std::max({worst, std::abs(fit.a - oa) / std::max(1.0, std::abs(oa)),
                          std::abs(fit.b - ob) / std::max(1e-3, std::abs(ob))});
        ++fits;
    }
    ok = mismatches == 0 && worst <= 1e-6;
    return std::to_string(fixtures) + " fixtures / " + std::to_string(windows) + " windows, " +
           std::to_string(mismatches) + " mismatches; " + std::to_string(fits) + " fits, worst relative gap " +
           fmt(worst, 3);
}

}  // namespace

int main() {
    std::cout << std::unitbuf;
    const auto t_start = Clock::now();

    {
        const auto c = run_classification();
        const double acc = double(c.correct) / c.total;
        const double dark = c.dark_total ? double(c.dark_correct) / c.dark_total : 0.0;
        const double bp = double(c.bp_correct) / c.bp_total;
        report("classification accuracy",
               acc >= 0.96 && c.dark_total > 0 && dark == 1.0 && bp >= 0.97 && c.seconds < 60.0,
               "overall " + fmt(acc) + " (>= 0.96) over " + std::to_string(c.total) + " frames, dark/bordered " +
                   fmt(dark) + " (= 1) over " + std::to_string(c.dark_total) + ", board/podium " + fmt(bp) +
                   " (>= 0.97), " + fmt(c.seconds, 3) + " s (< 60)");

        double worst = 0;
        std::string worst_cell = "none";
        for (const auto& [truth, row] : c.confusion) {
            int n = 0;
            for (const auto& [got, k] : row) n += k;
            for (const auto& [got, k] : row) {
                if (got == truth || (truth == MediaType::Illustration && got == MediaType::Computer)) continue;
                const double frac = double(k) / n;
                if (frac > worst) {
                    worst = frac;
                    worst_cell = std::string(to_string(truth)) + "->" + std::string(to_string(got));
                }
            }
        }
        const auto& ill = c.confusion.at(MediaType::Illustration);
        const int leak = ill.count(MediaType::Computer) ? ill.at(MediaType::Computer) : 0;
        report("confusion structure", worst <= 0.03,
               "largest off-diagonal cell " + fmt(worst) + " (" + worst_cell + ", <= 0.03); Illustration->Computer " +
                   std::to_string(leak) + "/100 exempt");
    }

    const std::vector<LectureSpec> specs{
        {synth::Profile::Linear, "linear", 150, 11},           {synth::Profile::Linear, "linear", 220, 12},
        {synth::Profile::Linear, "linear", 300, 13},           {synth::Profile::Linear, "linear", 350, 14},
        {synth::Profile::Interleaved, "interleaved", 180, 21}, {synth::Profile::Interleaved, "interleaved", 260, 22},
        {synth::Profile::Interleaved, "interleaved", 340, 23}, {synth::Profile::Mixed, "mixed", 160, 31},
        {synth::Profile::Mixed, "mixed", 240, 32},             {synth::Profile::Mixed, "mixed", 320, 33},
    };
    TempDir tmp;
    std::vector<LectureResult> lectures;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        lectures.push_back(run_lecture(specs[k], tmp.path() / ("lecture" + std::to_string(k))));
        const auto& r = lectures.back();
        std::cout << "  lecture " << r.spec.name << " " << r.spec.frames << "/" << r.spec.seed << ": topics "
                  << r.got_topics << " (truth " << r.truth_topics << "), rand " << fmt(r.rand_index)
                  << ", decision errors " << r.decision_errors << "/" << r.truth_clustered << ", "
                  << fmt(r.seconds, 3) << " s" << std::endl;
    }

    {
        bool ok = true;
        double worst_rand = 1, worst_err = 0;
        int worst_linear = 0;
        for (const auto& r : lectures) {
            const double err = r.truth_clustered ? double(r.decision_errors) / r.truth_clustered : 0.0;
            worst_rand = std::min(worst_rand, r.rand_index);
            worst_err = std::max(worst_err, err);
            if (r.spec.profile == synth::Profile::Linear)
                worst_linear = std::max(worst_linear, std::abs(r.got_topics - r.truth_topics));
            ok = ok && r.rand_index >= 0.95 && err <= 0.04;
        }
        ok = ok && worst_linear <= 1;
        report("clustering quality", ok,
               "min rand " + fmt(worst_rand) + " (>= 0.95), max decision error " + fmt(worst_err) +
                   " (<= 0.04), max linear topic-count error " + std::to_string(worst_linear) + " (<= 1) over " +
                   std::to_string(lectures.size()) + " lectures");
    }

    {
        bool ok = true;
        double lo = 1, hi = 0;
        for (const auto& r : lectures) {
            const double ratio = r.clustered ? double(r.got_topics) / r.clustered : 0.0;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            ok = ok && ratio >= 0.05 && ratio <= 0.20;
        }
        report("compression", ok, "topics / clustered frames in [" + fmt(lo) + ", " + fmt(hi) + "] (within [0.05, 0.20])");
    }

    // cost model, plus the byte-stability runs on the same lecture
    const LectureSpec cost_spec{synth::Profile::Mixed, "mixed", 200, 1};
    const fs::path cost_dir = tmp.path() / "cost";
    SegmentOutput cost_out;
    const LectureResult cost = run_lecture(cost_spec, cost_dir, &cost_out);
    {
        const double predicted = predicted_cost(200, CostModelParams{}).sum;
        const double measured = cost_out.index.stats.match_attempts;
        const auto& reg = cost_out.index.stats.regression;
        const double b = reg ? reg->b : -1;
        const bool ok = std::abs(measured - predicted) <= 0.15 * predicted && b >= 0.002 && b <= 0.006;
        report("cost model", ok,
               "match attempts " + fmt(measured, 6) + " vs predicted " + fmt(predicted, 6) + " (+-15%: " +
                   fmt(100.0 * (measured - predicted) / predicted, 3) + "%), fitted b " + fmt(b) +
                   " (in [0.002, 0.006]), fitted a " + fmt(reg ? reg->a : -1));
    }

    {
        bool ok = false;
        const std::string detail = oracle_equivalence(ok);
        report("oracle equivalence", ok, detail);
    }

    {
        const bool rle = rle_round_trips();
        std::size_t violations = cost.violations.size();
        bool idempotent = cost.postprocess_idempotent;
        for (const auto& r : lectures) {
            violations += r.violations.size();
            idempotent = idempotent && r.postprocess_idempotent;
        }

        bool matcher_ok = false;
        const std::string matcher = matcher_properties(matcher_ok);

        std::set<unsigned> counts{1u, 4u, max_threads()};
        std::map<std::string, std::string> reference;
        bool stable = true;
        for (unsigned t : counts) {
            PipelineConfig cfg;
            cfg.threads = t;
            const fs::path out = tmp.path() / ("emit" + std::to_string(t));
            write_segment_output(segment_directory(cost_dir, cfg), out);
            const auto bytes = tree_bytes(out);
            if (validate_index(read_index(out / "index.json")).size()) ++violations;
            if (reference.empty())
                reference = bytes;
            else
                stable = stable && bytes == reference;
        }
        std::string thread_list;
        for (unsigned t : counts) thread_list += (thread_list.empty() ? "" : ",") + std::to_string(t);

        report("invariant suites", rle && violations == 0 && idempotent && matcher_ok && stable && reference.size() > 3,
               std::string("rle ") + (rle ? "ok" : "broken") + ", index violations " + std::to_string(violations) +
                   ", post-processing " + (idempotent ? "idempotent" : "not idempotent") + ", matcher " + matcher +
                   ", emit at threads {" + thread_list + "} " + (stable ? "byte-identical" : "differs") + " (" +
                   std::to_string(reference.size()) + " files)");
    }

    std::cout << "acceptance: " << (failures ? std::to_string(failures) + " failed" : std::string("all passed")) << " in "
              << fmt(seconds_since(t_start), 4) << " s" << std::endl;
    return failures ? 1 : 0;
}
