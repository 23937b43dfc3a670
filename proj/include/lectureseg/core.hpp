#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lectureseg {

enum class MediaType { Board, Podium, Sheet, Illustration, Computer, Class, Unknown };

inline constexpr MediaType kAllMediaTypes[] = {MediaType::Board,    MediaType::Podium, MediaType::Sheet,
                                               MediaType::Illustration, MediaType::Computer, MediaType::Class,
                                               MediaType::Unknown};

inline std::string_view to_string(MediaType t) {
    switch (t) {
        case MediaType::Board: return "Board";
        case MediaType::Podium: return "Podium";
        case MediaType::Sheet: return "Sheet";
        case MediaType::Illustration: return "Illustration";
        case MediaType::Computer: return "Computer";
        case MediaType::Class: return "Class";
        case MediaType::Unknown: return "Unknown";
    }
    return "Unknown";
}

inline MediaType media_type_from_string(std::string_view s) {
    for (MediaType t : kAllMediaTypes)
        if (to_string(t) == s) return t;
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (MediaType t : kAllMediaTypes) {
        std::string name(to_string(t));
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
        if (name == lower) return t;
    }
    throw std::invalid_argument("unknown media type '" + std::string(s) + "'");
}

inline bool is_clustered(MediaType t) { return t == MediaType::Board || t == MediaType::Sheet; }

enum class NameHint { None, Title, Slide };

inline std::string_view to_string(NameHint h) {
    switch (h) {
        case NameHint::None: return "none";
        case NameHint::Title: return "title";
        case NameHint::Slide: return "slide";
    }
    return "none";
}

inline NameHint name_hint_from_string(std::string_view s) {
    if (s == "none") return NameHint::None;
    if (s == "title") return NameHint::Title;
    if (s == "slide") return NameHint::Slide;
    throw std::invalid_argument("unknown name hint '" + std::string(s) + "'");
}

// Which stage decided a frame's media type. Non-clustered runs in the topic
// string break when this changes, so a title frame and the podium frames
// after it stay separate tokens.
enum class LabelSource { Filename, Visual, PostProcess };

inline std::string_view to_string(LabelSource s) {
    switch (s) {
        case LabelSource::Filename: return "filename";
        case LabelSource::Visual: return "visual";
        case LabelSource::PostProcess: return "postprocess";
    }
    return "visual";
}

inline LabelSource label_source_from_string(std::string_view s) {
    if (s == "filename") return LabelSource::Filename;
    if (s == "visual") return LabelSource::Visual;
    if (s == "postprocess") return LabelSource::PostProcess;
    throw std::invalid_argument("unknown label source '" + std::string(s) + "'");
}

struct KeyFrame {
    std::string id;
    int seq = 0;
    std::optional<double> timestamp_s;
    std::string source_path;
    std::string thumb_path;
    NameHint name_hint = NameHint::None;
    MediaType media_type = MediaType::Unknown;
    LabelSource label_source = LabelSource::Visual;
    std::optional<int> topic_id;

    friend bool operator==(const KeyFrame&, const KeyFrame&) = default;
};

struct Topic {
    int id = 0;
    std::string label;
    MediaType media_type = MediaType::Board;
    std::vector<std::string> frame_ids;
    int most_recent_seq = 0;

    friend bool operator==(const Topic&, const Topic&) = default;
};

struct Regression {
    double a = 0.0;
    double b = 0.0;

    friend bool operator==(const Regression&, const Regression&) = default;
};

struct PipelineStats {
    int frames_total = 0;
    std::map<MediaType, int> per_type_counts;
    int match_attempts = 0;
    int matches_consecutive = 0;
    int matches_nonconsecutive = 0;
    int new_topics = 0;
    std::optional<Regression> regression;
    // pair comparisons spent on each clustered frame, in temporal order
    std::vector<int> attempts_board;
    std::vector<int> attempts_sheet;
    int skipped_files = 0;
    int run_count = 0;

    friend bool operator==(const PipelineStats&, const PipelineStats&) = default;
};

struct VideoInfo {
    std::string title;
    std::optional<double> duration_s;
    std::string video_url_template;

    friend bool operator==(const VideoInfo&, const VideoInfo&) = default;
};

struct TopicIndex {
    VideoInfo video;
    std::vector<KeyFrame> frames;
    std::vector<Topic> topics;
    std::string topic_string;
    PipelineStats stats;

    friend bool operator==(const TopicIndex&, const TopicIndex&) = default;
};

/// A, B, ..., Z, AA, AB, ... for ordinal 0, 1, ...
inline std::string topic_label(int ordinal) {
    if (ordinal < 0) throw std::invalid_argument("negative topic ordinal");
    std::string s;
    int n = ordinal + 1;
    while (n > 0) {
        --n;
        s.insert(s.begin(), static_cast<char>('A' + n % 26));
        n /= 26;
    }
    return s;
}

/// Letter used for a non-clustered frame in the topic string.
inline std::string media_letter(MediaType t) {
    switch (t) {
        case MediaType::Podium: return "X";
        case MediaType::Computer: return "Y";
        case MediaType::Illustration: return "I";
        case MediaType::Class: return "C";
        case MediaType::Board: return "B";
        case MediaType::Sheet: return "S";
        case MediaType::Unknown: return "?";
    }
    return "?";
}

struct RunToken {
    std::string label;
    int group = 0;

    friend bool operator==(const RunToken&, const RunToken&) = default;
};

/// "L^n" per maximal run of equal tokens, space separated.
inline std::string rle_topic_string(std::span<const RunToken> tokens) {
    std::string out;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t j = i + 1;
        while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
        if (!out.empty()) out += ' ';
        out += tokens[i].label;
        out += '^';
        out += std::to_string(j - i);
        i = j;
    }
    return out;
}

inline std::string rle_topic_string(std::span<const std::string> labels) {
    std::vector<RunToken> tokens;
    tokens.reserve(labels.size());
    for (const auto& l : labels) tokens.push_back({l, 0});
    return rle_topic_string(tokens);
}

struct Run {
    std::string label;
    int length = 0;
};

inline std::vector<Run> parse_topic_string(std::string_view s) {
    std::vector<Run> runs;
    std::size_t pos = 0;
    while (pos < s.size()) {
        while (pos < s.size() && s[pos] == ' ') ++pos;
        if (pos >= s.size()) break;
        const std::size_t end = std::min(s.find(' ', pos), s.size());
        const std::string_view tok = s.substr(pos, end - pos);
        const std::size_t caret = tok.find('^');
        if (caret == std::string_view::npos || caret == 0 || caret + 1 >= tok.size())
            throw std::invalid_argument("malformed run token '" + std::string(tok) + "'");
        Run r;
        r.label = std::string(tok.substr(0, caret));
        const auto num = tok.substr(caret + 1);
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), r.length);
        if (ec != std::errc{} || p != num.data() + num.size() || r.length <= 0)
            throw std::invalid_argument("malformed run length in '" + std::string(tok) + "'");
        runs.push_back(std::move(r));
        pos = end;
    }
    return runs;
}

/// Expands a topic string back into one label per frame.
inline std::vector<std::string> decode_topic_string(std::string_view s) {
    std::vector<std::string> labels;
    for (const auto& r : parse_topic_string(s)) labels.insert(labels.end(), r.length, r.label);
    return labels;
}

/// Run tokens for an index's frames in seq order.
inline std::vector<RunToken> frame_tokens(const std::vector<KeyFrame>& frames, const std::vector<Topic>& topics) {
    std::unordered_map<int, const Topic*> by_id;
    for (const auto& t : topics) by_id[t.id] = &t;
    std::vector<const KeyFrame*> ordered;
    for (const auto& f : frames) ordered.push_back(&f);
    std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->seq < b->seq; });
    std::vector<RunToken> tokens;
    for (const KeyFrame* f : ordered) {
        if (is_clustered(f->media_type) && f->topic_id && by_id.count(*f->topic_id)) {
            // topic ids are non-negative; keep them apart from label sources
            tokens.push_back({by_id[*f->topic_id]->label, 100 + *f->topic_id});
        } else {
            tokens.push_back({media_letter(f->media_type), static_cast<int>(f->label_source)});
        }
    }
    return tokens;
}

inline std::string build_topic_string(const std::vector<KeyFrame>& frames, const std::vector<Topic>& topics) {
    return rle_topic_string(frame_tokens(frames, topics));
}

/// Checks every TopicIndex invariant; returns one description per violation.
inline std::vector<std::string> validate_index(const TopicIndex& index) {
    std::vector<std::string> v;
    const auto& frames = index.frames;

    std::unordered_map<std::string, const KeyFrame*> by_id;
    std::set<int> seqs;
    for (const auto& f : frames) {
        if (!by_id.emplace(f.id, &f).second) v.push_back("duplicate frame id " + f.id);
        if (!seqs.insert(f.seq).second) v.push_back("duplicate seq " + std::to_string(f.seq) + " at frame " + f.id);
        if (f.media_type == MediaType::Unknown) v.push_back("frame " + f.id + " has media type Unknown");
        if (f.timestamp_s && *f.timestamp_s < 0) v.push_back("frame " + f.id + " has negative timestamp");
    }
    if (!seqs.empty() && (*seqs.begin() != 0 || *seqs.rbegin() != static_cast<int>(frames.size()) - 1))
        v.push_back("seq values are not dense 0..n-1");

    std::unordered_map<std::string, int> membership;
    std::set<int> recents;
    std::set<std::string> labels;
    std::set<int> topic_ids;
    for (const auto& t : index.topics) {
        const std::string tname = "topic " + t.label + " (id " + std::to_string(t.id) + ")";
        if (!topic_ids.insert(t.id).second) v.push_back("duplicate topic id " + std::to_string(t.id));
        if (!labels.insert(t.label).second) v.push_back("duplicate topic label " + t.label);
        if (!is_clustered(t.media_type)) v.push_back(tname + " has non-clusterable media type");
        if (t.frame_ids.empty()) {
            v.push_back(tname + " is empty");
            continue;
        }
        int prev_seq = -1;
        bool ordered = true;
        for (const auto& fid : t.frame_ids) {
            ++membership[fid];
            auto it = by_id.find(fid);
            if (it == by_id.end()) {
                v.push_back(tname + " references unknown frame " + fid);
                continue;
            }
            const KeyFrame& f = *it->second;
            if (f.media_type != t.media_type)
                v.push_back(tname + " contains frame " + fid + " of media type " + std::string(to_string(f.media_type)));
            if (!f.topic_id || *f.topic_id != t.id)
                v.push_back("frame " + fid + " listed in " + tname + " but carries a different topic_id");
            if (f.seq <= prev_seq) ordered = false;
            prev_seq = f.seq;
        }
        if (!ordered) v.push_back(tname + " frame_ids are not strictly increasing by seq");
        auto last = by_id.find(t.frame_ids.back());
        if (last != by_id.end() && last->second->seq != t.most_recent_seq)
            v.push_back(tname + " most_recent_seq does not match its last frame");
        if (!recents.insert(t.most_recent_seq).second)
            v.push_back(tname + " shares most_recent_seq " + std::to_string(t.most_recent_seq) + " with another topic");
    }

    for (const auto& f : frames) {
        const int n = membership.count(f.id) ? membership[f.id] : 0;
        if (is_clustered(f.media_type)) {
            if (n != 1)
                v.push_back("partition: frame " + f.id + " belongs to " + std::to_string(n) + " topics");
        } else {
            if (n != 0) v.push_back("partition: non-clustered frame " + f.id + " belongs to a topic");
            if (f.topic_id) v.push_back("frame " + f.id + " is not clusterable but has a topic_id");
        }
    }

    try {
        const auto runs = parse_topic_string(index.topic_string);
        long total = 0;
        for (const auto& r : runs) total += r.length;
        if (total != static_cast<long>(frames.size()))
            v.push_back("topic string exponents sum to " + std::to_string(total) + " but index has " +
                        std::to_string(frames.size()) + " frames");
        else if (index.topic_string != build_topic_string(frames, index.topics))
            v.push_back("topic string does not match frame labels");
    } catch (const std::invalid_argument& e) {
        v.push_back(std::string("topic string unparsable: ") + e.what());
    }

    const auto& s = index.stats;
    int clustered = 0;
    std::map<MediaType, int> counts;
    for (const auto& f : frames) {
        clustered += is_clustered(f.media_type);
        ++counts[f.media_type];
    }
    if (s.frames_total != static_cast<int>(frames.size())) v.push_back("stats.frames_total disagrees with frame count");
    if (s.matches_consecutive < 0 || s.matches_nonconsecutive < 0 || s.new_topics < 0 || s.match_attempts < 0)
        v.push_back("stats contain negative counts");
    if (s.matches_consecutive + s.matches_nonconsecutive + s.new_topics != clustered)
        v.push_back("stats event counts do not sum to the clustered frame count");
    for (MediaType t : kAllMediaTypes) {
        const int want = counts.count(t) ? counts[t] : 0;
        const int have = s.per_type_counts.count(t) ? s.per_type_counts.at(t) : 0;
        if (want != have) v.push_back("stats.per_type_counts disagrees for " + std::string(to_string(t)));
    }
    return v;
}

}  // namespace lectureseg
