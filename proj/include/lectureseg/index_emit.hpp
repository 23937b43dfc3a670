#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace lectureseg {

/// Event probabilities of the clustering loop and the topics-per-frame ratio.
struct CostModelParams {
    double p_exact = 0.89;
    double p_previous = 0.036;
    double p_new_topic = 0.074;
    double topic_ratio = 0.074;

    double linear() const { return p_exact; }
    /// Coefficient of f^2 in the closed form a*f + b*f^2.
    double quadratic() const { return topic_ratio * (p_previous / 2.0 + p_new_topic) / 2.0; }
};

struct CostPrediction {
    double sum = 0;          // exact summation over k = 1..f
    double closed_form = 0;  // a*f + 2b * f^2 (1 + 1/f) / 2
    double a = 0;
    double b = 0;
};

/// Expected number of pair matches to cluster f frames.
inline CostPrediction predicted_cost(int f, const CostModelParams& p) {
    if (f < 0) throw std::invalid_argument("frame count must be non-negative");
    CostPrediction c;
    c.a = p.linear();
    c.b = p.quadratic();
    for (int k = 1; k <= f; ++k) {
        const double topics = k * p.topic_ratio;
        c.sum += p.p_exact + p.p_previous * topics / 2.0 + p.p_new_topic * topics;
    }
    if (f > 0) c.closed_form = c.a * f + 2.0 * c.b * double(f) * f * (1.0 + 1.0 / f) / 2.0;
    return c;
}

struct QuadraticFit {
    double a = 0;
    double b = 0;
    double residual_norm = 0;
};

/// Least squares M = a*f + b*f^2 (no constant), solved by Givens QR.
inline QuadraticFit fit_quadratic(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("degenerate regression input");
    // rows [f, f^2 | m], reduced in place to upper-triangular R and Q^T m
    double r11 = 0, r12 = 0, r22 = 0, q1 = 0, q2 = 0;
    double scale = 0;
    for (const auto& [f, m] : points) scale = std::max(scale, std::abs(f));
    if (scale == 0) throw std::invalid_argument("degenerate regression input");
    std::vector<double> tail;  // rotated-out components of m (the residual)
    bool first = true, second = true;
    for (const auto& [f0, m0] : points) {
        double x1 = f0 / scale, x2 = (f0 / scale) * (f0 / scale), y = m0;
        if (first) {
            r11 = x1, r12 = x2, q1 = y;
            first = false;
            continue;
        }
        // rotate row against row 1
        double rr = std::hypot(r11, x1);
        if (rr > 0) {
            const double c = r11 / rr, s = x1 / rr;
            const double n12 = c * r12 + s * x2, n2 = -s * r12 + c * x2;
            const double nq = c * q1 + s * y, ny = -s * q1 + c * y;
            r11 = rr, r12 = n12, x2 = n2, q1 = nq, y = ny;
        }
        if (second) {
            r22 = x2, q2 = y;
            second = false;
            continue;
        }
        rr = std::hypot(r22, x2);
        if (rr > 0) {
            const double c = r22 / rr, s = x2 / rr;
            const double nq = c * q2 + s * y, ny = -s * q2 + c * y;
            r22 = rr, q2 = nq, y = ny;
        }
        tail.push_back(y);
    }
    if (std::abs(r11) < 1e-12 || std::abs(r22) < 1e-10 * std::abs(r11))
        throw std::invalid_argument("degenerate regression input");
    QuadraticFit fit;
    const double bs = q2 / r22;
    const double as = (q1 - r12 * bs) / r11;
    fit.a = as / scale;
    fit.b = bs / (scale * scale);
    double rn = 0;
    for (double t : tail) rn += t * t;
    fit.residual_norm = std::sqrt(rn);
    return fit;
}

/// Points (k, cumulative matches after k frames) of each clustered sequence.
inline std::vector<std::pair<double, double>> cumulative_points(const std::vector<int>& attempts) {
    std::vector<std::pair<double, double>> pts;
    double sum = 0;
    for (std::size_t k = 0; k < attempts.size(); ++k) {
        sum += attempts[k];
        pts.emplace_back(double(k + 1), sum);
    }
    return pts;
}

inline std::optional<Regression> regression_from_attempts(const std::vector<int>& board,
                                                          const std::vector<int>& sheet) {
    auto pts = cumulative_points(board);
    auto more = cumulative_points(sheet);
    pts.insert(pts.end(), more.begin(), more.end());
    try {
        const auto fit = fit_quadratic(pts);
        return Regression{fit.a, fit.b};
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

/// Empirical event probabilities. The first frame of each clustered sequence
/// has nothing to match against and is left out of the decision counts.
inline CostModelParams measured_params(const PipelineStats& s) {
    const int sequences = int(!s.attempts_board.empty()) + int(!s.attempts_sheet.empty());
    const int clustered = s.matches_consecutive + s.matches_nonconsecutive + s.new_topics;
    const int decisions = clustered - sequences;
    CostModelParams p{0, 0, 0, 0};
    if (clustered > 0) p.topic_ratio = double(s.new_topics) / clustered;
    if (decisions > 0) {
        p.p_exact = double(s.matches_consecutive) / decisions;
        p.p_previous = double(s.matches_nonconsecutive) / decisions;
        p.p_new_topic = double(s.new_topics - sequences) / decisions;
    } else if (clustered > 0) {
        p.p_exact = 1.0;
    }
    return p;
}

// ---------------------------------------------------------------------------
// serialization

using json = nlohmann::ordered_json;

inline constexpr int kIndexSchema = 1;

struct Span {
    int first_seq = 0;
    int last_seq = 0;
    bool contiguous = true;
};

/// Maximal runs of consecutive seq values within a topic. A span is
/// `contiguous` when no clustered frame of another topic lies between it and
/// the previous span (only podium/computer/... frames interrupt it).
inline std::vector<Span> topic_spans(const std::vector<int>& seqs, const std::vector<int>& other_topic_seqs = {}) {
    std::vector<Span> spans;
    for (int s : seqs) {
        if (!spans.empty() && s == spans.back().last_seq + 1) {
            spans.back().last_seq = s;
            continue;
        }
        bool contiguous = true;
        if (!spans.empty()) {
            const int lo = spans.back().last_seq, hi = s;
            contiguous = std::none_of(other_topic_seqs.begin(), other_topic_seqs.end(),
                                      [&](int o) { return o > lo && o < hi; });
        }
        spans.push_back({s, s, contiguous});
    }
    return spans;
}

inline json to_json(const TopicIndex& index) {
    json j;
    j["schema"] = kIndexSchema;
    json video;
    video["title"] = index.video.title;
    video["duration_s"] = index.video.duration_s ? json(*index.video.duration_s) : json(nullptr);
    video["video_url_template"] = index.video.video_url_template;
    j["video"] = video;

    std::unordered_map<std::string, int> seq_of;
    json frames = json::array();
    for (const auto& f : index.frames) {
        seq_of[f.id] = f.seq;
        json fj;
        fj["id"] = f.id;
        fj["seq"] = f.seq;
        fj["timestamp_s"] = f.timestamp_s ? json(*f.timestamp_s) : json(nullptr);
        fj["file"] = f.source_path;
        fj["thumb"] = f.thumb_path;
        fj["media_type"] = std::string(to_string(f.media_type));
        fj["name_hint"] = std::string(to_string(f.name_hint));
        fj["label_source"] = std::string(to_string(f.label_source));
        fj["topic_id"] = f.topic_id ? json(*f.topic_id) : json(nullptr);
        frames.push_back(std::move(fj));
    }
    j["frames"] = std::move(frames);

    json topics = json::array();
    for (const auto& t : index.topics) {
        json tj;
        tj["id"] = t.id;
        tj["label"] = t.label;
        tj["media_type"] = std::string(to_string(t.media_type));
        tj["frame_ids"] = t.frame_ids;
        tj["most_recent_seq"] = t.most_recent_seq;
        std::vector<int> seqs, others;
        for (const auto& id : t.frame_ids) seqs.push_back(seq_of.count(id) ? seq_of[id] : -1);
        for (const auto& f : index.frames)
            if (f.topic_id && *f.topic_id != t.id) others.push_back(f.seq);
        json spans = json::array();
        for (const auto& s : topic_spans(seqs, others))
            spans.push_back({{"first_seq", s.first_seq}, {"last_seq", s.last_seq}, {"contiguous", s.contiguous}});
        tj["spans"] = std::move(spans);
        topics.push_back(std::move(tj));
    }
    j["topics"] = std::move(topics);
    j["topic_string"] = index.topic_string;

    const auto& s = index.stats;
    json st;
    st["frames_total"] = s.frames_total;
    json per_type;
    for (const auto& [t, n] : s.per_type_counts) per_type[std::string(to_string(t))] = n;
    st["per_type_counts"] = per_type.is_null() ? json::object() : per_type;
    st["match_attempts"] = s.match_attempts;
    st["matches_consecutive"] = s.matches_consecutive;
    st["matches_nonconsecutive"] = s.matches_nonconsecutive;
    st["new_topics"] = s.new_topics;
    st["regression"] = s.regression ? json{{"a", s.regression->a}, {"b", s.regression->b}} : json(nullptr);
    st["attempts_board"] = s.attempts_board;
    st["attempts_sheet"] = s.attempts_sheet;
    st["skipped_files"] = s.skipped_files;
    st["run_count"] = s.run_count;
    j["stats"] = std::move(st);
    return j;
}

inline TopicIndex index_from_json(const json& j) {
    if (!j.is_object() || !j.contains("schema")) throw std::runtime_error("index: missing schema");
    if (j.at("schema").get<int>() != kIndexSchema) throw std::runtime_error("index: unsupported schema version");
    TopicIndex index;
    const auto& v = j.at("video");
    index.video.title = v.at("title").get<std::string>();
    if (!v.at("duration_s").is_null()) index.video.duration_s = v.at("duration_s").get<double>();
    index.video.video_url_template = v.at("video_url_template").get<std::string>();
    for (const auto& fj : j.at("frames")) {
        KeyFrame f;
        f.id = fj.at("id").get<std::string>();
        f.seq = fj.at("seq").get<int>();
        if (!fj.at("timestamp_s").is_null()) f.timestamp_s = fj.at("timestamp_s").get<double>();
        f.source_path = fj.at("file").get<std::string>();
        f.thumb_path = fj.at("thumb").get<std::string>();
        f.media_type = media_type_from_string(fj.at("media_type").get<std::string>());
        f.name_hint = name_hint_from_string(fj.at("name_hint").get<std::string>());
        f.label_source = label_source_from_string(fj.at("label_source").get<std::string>());
        if (!fj.at("topic_id").is_null()) f.topic_id = fj.at("topic_id").get<int>();
        index.frames.push_back(std::move(f));
    }
    for (const auto& tj : j.at("topics")) {
        Topic t;
        t.id = tj.at("id").get<int>();
        t.label = tj.at("label").get<std::string>();
        t.media_type = media_type_from_string(tj.at("media_type").get<std::string>());
        t.frame_ids = tj.at("frame_ids").get<std::vector<std::string>>();
        t.most_recent_seq = tj.at("most_recent_seq").get<int>();
        index.topics.push_back(std::move(t));
    }
    index.topic_string = j.at("topic_string").get<std::string>();
    const auto& st = j.at("stats");
    auto& s = index.stats;
    s.frames_total = st.at("frames_total").get<int>();
    for (const auto& [k, n] : st.at("per_type_counts").items()) s.per_type_counts[media_type_from_string(k)] = n.get<int>();
    s.match_attempts = st.at("match_attempts").get<int>();
    s.matches_consecutive = st.at("matches_consecutive").get<int>();
    s.matches_nonconsecutive = st.at("matches_nonconsecutive").get<int>();
    s.new_topics = st.at("new_topics").get<int>();
    if (!st.at("regression").is_null())
        s.regression = Regression{st.at("regression").at("a").get<double>(), st.at("regression").at("b").get<double>()};
    s.attempts_board = st.at("attempts_board").get<std::vector<int>>();
    s.attempts_sheet = st.at("attempts_sheet").get<std::vector<int>>();
    s.skipped_files = st.at("skipped_files").get<int>();
    s.run_count = st.at("run_count").get<int>();
    return index;
}

/// Reads an index.json; throws std::runtime_error on malformed input.
inline TopicIndex read_index(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return index_from_json(json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed index " + path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("malformed index " + path.string() + ": " + e.what());
    }
}

inline std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

inline std::string stats_text(const TopicIndex& index) {
    const auto& s = index.stats;
    std::ostringstream os;
    os << "frames_total=" << s.frames_total << '\n';
    for (const auto& [t, n] : s.per_type_counts) os << "count." << to_string(t) << '=' << n << '\n';
    os << "topics=" << index.topics.size() << '\n';
    os << "runs=" << s.run_count << '\n';
    os << "match_attempts=" << s.match_attempts << '\n';
    os << "matches_consecutive=" << s.matches_consecutive << '\n';
    os << "matches_nonconsecutive=" << s.matches_nonconsecutive << '\n';
    os << "new_topics=" << s.new_topics << '\n';
    const CostModelParams p = measured_params(s);
    os << "p_exact=" << format_number(p.p_exact) << '\n';
    os << "p_previous=" << format_number(p.p_previous) << '\n';
    os << "p_new_topic=" << format_number(p.p_new_topic) << '\n';
    os << "topic_ratio=" << format_number(p.topic_ratio) << '\n';
    if (s.regression) {
        os << "regression_a=" << format_number(s.regression->a) << '\n';
        os << "regression_b=" << format_number(s.regression->b) << '\n';
    } else {
        os << "regression=none\n";
    }
    os << "skipped_files=" << s.skipped_files << '\n';
    return os.str();
}

struct InvalidIndexError : std::runtime_error {
    std::vector<std::string> violations;
    explicit InvalidIndexError(std::vector<std::string> v)
        : std::runtime_error("invalid index: " + (v.empty() ? std::string() : v.front())), violations(std::move(v)) {}
};

/// Writes index.json, topics.txt and stats.txt. Refuses invalid indexes.
inline void emit_index(const TopicIndex& index, const std::filesystem::path& out_dir) {
    auto violations = validate_index(index);
    if (!violations.empty()) throw InvalidIndexError(std::move(violations));
    std::filesystem::create_directories(out_dir);
    auto write = [&](const char* name, const std::string& text) {
        std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(std::string("cannot write ") + name);
        out << text;
    };
    write("index.json", to_json(index).dump(2) + "\n");
    write("topics.txt", index.topic_string + "\n");
    write("stats.txt", stats_text(index));
}

}  // namespace lectureseg
