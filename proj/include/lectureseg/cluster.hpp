#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "index_emit.hpp"
#include "matcher.hpp"

namespace lectureseg {

enum class ClusterOutcome { ExtendedRecent, ExtendedPrior, NewTopic };

inline std::string_view to_string(ClusterOutcome o) {
    switch (o) {
        case ClusterOutcome::ExtendedRecent: return "extended-recent";
        case ClusterOutcome::ExtendedPrior: return "extended-prior";
        case ClusterOutcome::NewTopic: return "new-topic";
    }
    return "new-topic";
}

struct TraceRecord {
    std::size_t frame = 0;  // position in the clustered sequence
    ClusterOutcome outcome = ClusterOutcome::NewTopic;
    int topic = 0;          // local topic index (creation order)
    int topics_tried = 0;
    double score = 0;
    bool empty_content = false;
};

struct PairOutcome {
    bool accepted = false;
    double score = 0;
};

struct ClusterResult {
    std::vector<std::vector<std::size_t>> topics;  // creation order; members in temporal order
    std::vector<int> recency;                      // topic indices, most recent last
    std::vector<TraceRecord> trace;
};

struct NoTailHook {
    void operator()(std::size_t, std::size_t) const {}
};

/// Recency-ordered topic clustering over a temporally ordered sequence.
/// `match(older, newer)` decides whether frame `newer` elaborates `older`;
/// `has_content(k)` is false for frames that can only start a singleton topic.
/// `on_extend(old_tail, frame)` runs when a frame replaces a topic's tail.
template <class MatchFn, class ContentFn, class TailFn = NoTailHook>
ClusterResult cluster_sequence(std::size_t n, MatchFn&& match, ContentFn&& has_content, TailFn&& on_extend = {}) {
    ClusterResult res;
    for (std::size_t f = 0; f < n; ++f) {
        TraceRecord rec;
        rec.frame = f;
        rec.empty_content = !has_content(f);
        int found = -1;
        if (!rec.empty_content) {
            for (auto it = res.recency.rbegin(); it != res.recency.rend(); ++it) {
                const int t = *it;
                ++rec.topics_tried;
                const PairOutcome o = match(res.topics[t].back(), f);
                if (o.accepted) {
                    found = t;
                    rec.score = o.score;
                    break;
                }
            }
        }
        if (found < 0) {
            found = static_cast<int>(res.topics.size());
            res.topics.push_back({});
            rec.outcome = ClusterOutcome::NewTopic;
        } else {
            rec.outcome = found == res.recency.back() ? ClusterOutcome::ExtendedRecent : ClusterOutcome::ExtendedPrior;
            res.recency.erase(std::find(res.recency.begin(), res.recency.end(), found));
            on_extend(res.topics[found].back(), f);
        }
        res.topics[found].push_back(f);
        res.recency.push_back(found);
        rec.topic = found;
        res.trace.push_back(rec);
    }
    return res;
}

struct ClusterConfig {
    bool board_two_way = true;
};

/// Clusters derived content frames of one media type. Sheets match forward
/// only; boards accept a match in either direction and keep the higher score.
inline ClusterResult cluster_frames(const std::vector<BinaryRaster>& contents, MediaType media,
                                    const MatchConfig& mcfg = {}, const ClusterConfig& ccfg = {}) {
    if (!is_clustered(media)) throw std::invalid_argument("only Board and Sheet frames are clustered");
    std::vector<std::unique_ptr<PreparedFrame>> prepared(contents.size());
    auto frame = [&](std::size_t k) -> PreparedFrame& {
        if (!prepared[k]) prepared[k] = std::make_unique<PreparedFrame>(contents[k], mcfg);
        return *prepared[k];
    };
    const bool two_way = media == MediaType::Board && ccfg.board_two_way;
    auto match = [&](std::size_t older, std::size_t newer) {
        const MatchResult fwd = match_frames(frame(older), frame(newer), mcfg);
        PairOutcome out{fwd.accepted, fwd.score};
        if (two_way) {
            const MatchResult rev = match_frames(frame(newer), frame(older), mcfg);
            out.accepted = fwd.accepted || rev.accepted;
            out.score = std::max(fwd.score, rev.score);
        }
        return out;
    };
    auto has_content = [&](std::size_t k) { return !frame(k).windows().empty(); };
    // only topic tails are ever matched again
    auto drop = [&](std::size_t old_tail, std::size_t) { prepared[old_tail].reset(); };
    return cluster_sequence(contents.size(), match, has_content, drop);
}

/// Same as cluster_frames for frames in any input order: they are clustered
/// by ascending `seq`, and topic members and trace records index the input.
inline ClusterResult cluster_in_time_order(const std::vector<int>& seq, std::vector<BinaryRaster> contents,
                                           MediaType media, const MatchConfig& mcfg = {},
                                           const ClusterConfig& ccfg = {}) {
    if (seq.size() != contents.size()) throw std::invalid_argument("one sequence number per content frame");
    std::vector<std::size_t> order(seq.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return seq[a] < seq[b]; });
    std::vector<BinaryRaster> sorted;
    sorted.reserve(contents.size());
    for (auto k : order) sorted.push_back(std::move(contents[k]));
    ClusterResult res = cluster_frames(sorted, media, mcfg, ccfg);
    for (auto& t : res.topics)
        for (auto& f : t) f = order[f];
    for (auto& r : res.trace) r.frame = order[r.frame];
    return res;
}

/// Merges per-type clusterings into a labelled TopicIndex with statistics.
/// `board_frames` / `sheet_frames` hold indices into `frames`, temporally ordered.
inline TopicIndex assemble_index(std::vector<KeyFrame> frames, const std::vector<std::size_t>& board_frames,
                                 const ClusterResult& board, const std::vector<std::size_t>& sheet_frames,
                                 const ClusterResult& sheet, VideoInfo video = {}, int skipped_files = 0) {
    std::vector<int> covered(frames.size(), 0);
    for (auto k : board_frames) {
        if (k >= frames.size() || frames[k].media_type != MediaType::Board)
            throw std::runtime_error("consistency error: board clustering covers a non-Board frame");
        ++covered[k];
    }
    for (auto k : sheet_frames) {
        if (k >= frames.size() || frames[k].media_type != MediaType::Sheet)
            throw std::runtime_error("consistency error: sheet clustering covers a non-Sheet frame");
        ++covered[k];
    }
    for (std::size_t k = 0; k < frames.size(); ++k)
        if (is_clustered(frames[k].media_type) != (covered[k] == 1))
            throw std::runtime_error("consistency error: frame " + frames[k].id + " not covered exactly once");

    struct Pending {
        MediaType media;
        std::vector<std::size_t> members;  // indices into frames
    };
    std::vector<Pending> pending;
    auto collect = [&](const std::vector<std::size_t>& map, const ClusterResult& res, MediaType media) {
        std::size_t total = 0;
        for (const auto& t : res.topics) {
            Pending p{media, {}};
            for (auto local : t) p.members.push_back(map.at(local));
            total += t.size();
            pending.push_back(std::move(p));
        }
        if (total != map.size()) throw std::runtime_error("consistency error: clustering is not a partition");
    };
    collect(board_frames, board, MediaType::Board);
    collect(sheet_frames, sheet, MediaType::Sheet);
    std::stable_sort(pending.begin(), pending.end(), [&](const Pending& a, const Pending& b) {
        return frames[a.members.front()].seq < frames[b.members.front()].seq;
    });

    TopicIndex index;
    index.video = std::move(video);
    for (auto& f : frames) f.topic_id.reset();
    for (std::size_t t = 0; t < pending.size(); ++t) {
        Topic topic;
        topic.id = static_cast<int>(t);
        topic.label = topic_label(topic.id);
        topic.media_type = pending[t].media;
        for (auto k : pending[t].members) {
            topic.frame_ids.push_back(frames[k].id);
            frames[k].topic_id = topic.id;
        }
        topic.most_recent_seq = frames[pending[t].members.back()].seq;
        index.topics.push_back(std::move(topic));
    }
    std::stable_sort(frames.begin(), frames.end(), [](const KeyFrame& a, const KeyFrame& b) { return a.seq < b.seq; });
    index.frames = std::move(frames);
    index.topic_string = build_topic_string(index.frames, index.topics);

    PipelineStats& s = index.stats;
    s.frames_total = static_cast<int>(index.frames.size());
    for (MediaType t : kAllMediaTypes) s.per_type_counts[t] = 0;
    for (const auto& f : index.frames) ++s.per_type_counts[f.media_type];
    auto tally = [&](const ClusterResult& res, std::vector<int>& attempts) {
        for (const auto& r : res.trace) {
            attempts.push_back(r.topics_tried);
            s.match_attempts += r.topics_tried;
            switch (r.outcome) {
                case ClusterOutcome::ExtendedRecent: ++s.matches_consecutive; break;
                case ClusterOutcome::ExtendedPrior: ++s.matches_nonconsecutive; break;
                case ClusterOutcome::NewTopic: ++s.new_topics; break;
            }
        }
    };
    tally(board, s.attempts_board);
    tally(sheet, s.attempts_sheet);
    s.regression = regression_from_attempts(s.attempts_board, s.attempts_sheet);
    s.skipped_files = skipped_files;
    s.run_count = static_cast<int>(parse_topic_string(index.topic_string).size());
    return index;
}

}  // namespace lectureseg
