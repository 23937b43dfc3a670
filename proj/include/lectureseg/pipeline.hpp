#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "classifier.hpp"
#include "cluster.hpp"
#include "config.hpp"
#include "content_filter.hpp"
#include "image_io.hpp"
#include "index_emit.hpp"
#include "ingest.hpp"
#include "matcher.hpp"
#include "parallel.hpp"
#include "synth.hpp"

namespace lectureseg {

namespace fs = std::filesystem;

struct SegmentOutput {
    TopicIndex index;
    std::vector<Raster> thumbs;  // parallel to index.frames
    std::vector<std::string> warnings;
};

struct Progress {
    std::ostream* log = nullptr;
    void operator()(const std::string& msg) const {
        if (log) *log << msg << '\n';
    }
};

/// Labels every frame: filename hints first, then the visual tree, then the
/// two post-processing passes.
inline std::vector<ClassifiedFrame> classify_frames(const std::vector<KeyFrame>& frames,
                                                    const std::vector<Raster>& images, const ClassifierConfig& cfg,
                                                    unsigned threads) {
    std::vector<ClassifiedFrame> out(frames.size());
    parallel_for(frames.size(), threads, [&](std::size_t i) {
        const KeyFrame pre = preclassify_by_name(frames[i]);
        out[i] = classify(images[i], pre.media_type, cfg);
    });
    out = postprocess_tail(std::move(out), cfg);
    return postprocess_computer_runs(std::move(out), cfg);
}

inline void write_debug_bundle(const FilterDebugBundle& bundle, const std::string& id, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& [stage, mask] : bundle) write_png(mask, dir / (id + "_" + stage + ".png"));
}

/// Full pipeline over a directory of key frames; nothing is written except
/// the optional filter debug stages.
inline SegmentOutput segment_directory(const fs::path& input_dir, const PipelineConfig& cfg, Progress progress = {}) {
    std::optional<Manifest> manifest;
    if (fs::exists(input_dir / "manifest.json")) manifest = read_manifest(input_dir / "manifest.json");
    IngestResult ingest = scan_key_frames(input_dir, manifest, cfg.ingest, cfg.threads);
    progress("ingested " + std::to_string(ingest.frames.size()) + " frames, skipped " + std::to_string(ingest.skipped));

    const auto classified = classify_frames(ingest.frames, ingest.images, cfg.classifier, cfg.threads);
    for (std::size_t i = 0; i < ingest.frames.size(); ++i) {
        ingest.frames[i].media_type = classified[i].type;
        ingest.frames[i].label_source = classified[i].source;
    }
    progress("classified");

    std::vector<std::size_t> board_frames, sheet_frames;
    for (std::size_t i = 0; i < ingest.frames.size(); ++i) {
        if (ingest.frames[i].media_type == MediaType::Board) board_frames.push_back(i);
        if (ingest.frames[i].media_type == MediaType::Sheet) sheet_frames.push_back(i);
    }
    auto contents_of = [&](const std::vector<std::size_t>& which) {
        std::vector<BinaryRaster> contents(which.size());
        parallel_for(which.size(), cfg.threads, [&](std::size_t k) {
            const std::size_t i = which[k];
            FilterDebugBundle bundle;
            contents[k] = derive_content(ingest.images[i], ingest.frames[i].media_type, cfg.filter,
                                         cfg.debug_dir ? &bundle : nullptr);
            if (cfg.debug_dir) write_debug_bundle(bundle, ingest.frames[i].id, *cfg.debug_dir);
        });
        return contents;
    };
    auto seqs_of = [&](const std::vector<std::size_t>& which) {
        std::vector<int> seqs;
        for (auto i : which) seqs.push_back(ingest.frames[i].seq);
        return seqs;
    };
    const ClusterResult board = board_frames.empty() ? ClusterResult{}
                                                     : cluster_in_time_order(seqs_of(board_frames), contents_of(board_frames),
                                                                             MediaType::Board, cfg.matcher, cfg.cluster);
    progress("board: " + std::to_string(board_frames.size()) + " frames, " + std::to_string(board.topics.size()) + " topics");
    const ClusterResult sheet = sheet_frames.empty() ? ClusterResult{}
                                                     : cluster_in_time_order(seqs_of(sheet_frames), contents_of(sheet_frames),
                                                                             MediaType::Sheet, cfg.matcher, cfg.cluster);
    progress("sheet: " + std::to_string(sheet_frames.size()) + " frames, " + std::to_string(sheet.topics.size()) + " topics");

    std::vector<Raster> thumbs(ingest.frames.size());
    parallel_for(ingest.frames.size(), cfg.threads,
                 [&](std::size_t i) { thumbs[i] = make_thumbnail(ingest.images[i], cfg.thumb_edge); });
    for (auto& f : ingest.frames) f.thumb_path = "thumbs/" + f.id + ".png";

    VideoInfo video = manifest ? manifest->video : VideoInfo{};
    SegmentOutput out;
    // frames keep their ingest order, so thumbs stay aligned after assembly
    out.index = assemble_index(std::move(ingest.frames), board_frames, board, sheet_frames, sheet, std::move(video),
                               ingest.skipped);
    out.thumbs = std::move(thumbs);
    out.warnings = std::move(ingest.warnings);
    return out;
}

/// Writes index files and thumbnails into a staging directory next to
/// `out_dir`, then moves them into place. Nothing is left behind on failure.
inline void write_segment_output(const SegmentOutput& out, const fs::path& out_dir) {
    const fs::path target = fs::absolute(out_dir);
    const fs::path staging = target.parent_path() / (target.filename().string() + ".partial");
    fs::remove_all(staging);
    try {
        emit_index(out.index, staging);
        fs::create_directories(staging / "thumbs");
        for (std::size_t i = 0; i < out.thumbs.size(); ++i) write_png(out.thumbs[i], staging / out.index.frames[i].thumb_path);
        fs::create_directories(target);
        for (const char* name : {"index.json", "topics.txt", "stats.txt", "thumbs"}) {
            fs::remove_all(target / name);
            fs::rename(staging / name, target / name);
        }
        fs::remove_all(staging);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
}

inline int cmd_segment(const fs::path& input_dir, const fs::path& out_dir, const PipelineConfig& cfg, std::ostream& out,
                       std::ostream& err) {
    try {
        const SegmentOutput res = segment_directory(input_dir, cfg, Progress{&err});
        for (const auto& w : res.warnings) err << "warning: " << w << '\n';
        write_segment_output(res, out_dir);
        out << "frames=" << res.index.frames.size() << " topics=" << res.index.topics.size()
            << " errors=" << res.index.stats.skipped_files << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline std::string features_text(const FeatureVector& f) {
    std::ostringstream os;
    os << std::setprecision(4);
    os << "mean_luma=" << f.mean_luma << " border_black=" << f.border_black.left << ',' << f.border_black.right << ','
       << f.border_black.top << ',' << f.border_black.bottom << " green=" << f.green_frac
       << " green_bottom=" << f.green_bottom_frac << " green_border=" << f.green_border_fracs.left << ','
       << f.green_border_fracs.right << ',' << f.green_border_fracs.top << ',' << f.green_border_fracs.bottom
       << " white=" << f.white_frac << " light=" << f.light_frac << " hlm=" << f.hlm << " crm=" << f.crm
       << " dark_area=" << f.dark_area_frac;
    return os.str();
}

/// One line per image; filename hints apply as in the pipeline.
inline int cmd_classify(const std::vector<fs::path>& files, const PipelineConfig& cfg, std::ostream& out,
                        std::ostream& err) {
    int failed = 0;
    for (const auto& file : files) {
        const auto img = read_image(file);
        if (!img) {
            err << file.string() << " error: cannot decode image\n";
            ++failed;
            continue;
        }
        KeyFrame k;
        k.name_hint = name_hint_for(file.stem().string(), cfg.ingest);
        const ClassifiedFrame c = classify(*img, preclassify_by_name(k).media_type, cfg.classifier);
        out << file.string() << ' ' << to_string(c.type) << ' ' << features_text(c.features)
            << " source=" << to_string(c.source) << '\n';
    }
    return !files.empty() && failed == static_cast<int>(files.size()) ? 1 : 0;
}

inline void print_match(const MatchResult& r, std::ostream& out) {
    out << std::setprecision(6);
    out << "n_windows_found=" << r.n_windows_found << '\n'
        << "n_matched=" << r.n_matched << '\n'
        << "q_mean=" << r.q_mean << '\n'
        << "sigma_trans=" << r.sigma_trans << '\n'
        << "sigma_spatial=" << r.sigma_spatial << '\n'
        << "scale=" << r.scale << '\n'
        << "score=" << r.score << '\n'
        << "accepted=" << (r.accepted ? "true" : "false") << '\n';
    for (std::size_t k = 0; k < r.correspondences.size(); ++k) {
        const auto& c = r.correspondences[k];
        out << "window." << k << "=" << c.source.x << ',' << c.source.y << ',' << c.source.w << ',' << c.source.h
            << " cc=" << c.source.cc << " target=" << c.target_x << ',' << c.target_y << " quality=" << c.quality << '\n';
    }
}

inline int cmd_match(const fs::path& a, const fs::path& b, MediaType media, const PipelineConfig& cfg, std::ostream& out,
                     std::ostream& err) {
    const auto ia = read_image(a), ib = read_image(b);
    if (!ia || !ib) {
        err << "error: cannot decode " << (!ia ? a : b).string() << '\n';
        return 1;
    }
    const BinaryRaster ca = derive_content(*ia, media, cfg.filter), cb = derive_content(*ib, media, cfg.filter);
    print_match(match_frames(ca, cb, cfg.matcher), out);
    return 0;
}

inline int cmd_stats(const fs::path& index_path, std::ostream& out, std::ostream& err) {
    TopicIndex index;
    try {
        index = read_index(index_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    const PipelineStats& s = index.stats;
    const CostModelParams measured = measured_params(s);
    out << std::setprecision(6);
    out << "frames_total=" << s.frames_total << '\n'
        << "topics=" << index.topics.size() << '\n'
        << "p_exact=" << measured.p_exact << '\n'
        << "p_previous=" << measured.p_previous << '\n'
        << "p_new_topic=" << measured.p_new_topic << '\n'
        << "topic_ratio=" << measured.topic_ratio << '\n';
    const auto fit = regression_from_attempts(s.attempts_board, s.attempts_sheet);
    if (fit)
        out << "fit_a=" << fit->a << '\n' << "fit_b=" << fit->b << '\n';
    else
        out << "fit=none\n";
    const int clustered = static_cast<int>(s.attempts_board.size() + s.attempts_sheet.size());
    const CostPrediction modeled = predicted_cost(clustered, CostModelParams{});
    const CostPrediction own = predicted_cost(clustered, measured);
    out << "clustered_frames=" << clustered << '\n'
        << "match_attempts=" << s.match_attempts << '\n'
        << "predicted_cost_model=" << modeled.sum << '\n'
        << "predicted_cost_measured=" << own.sum << '\n';
    if (modeled.sum > 0) out << "attempts_over_model=" << s.match_attempts / modeled.sum << '\n';
    return 0;
}

inline std::string_view to_string(synth::TruthEvent e) {
    switch (e) {
        case synth::TruthEvent::None: return "none";
        case synth::TruthEvent::Consecutive: return "consecutive";
        case synth::TruthEvent::Prior: return "prior";
        case synth::TruthEvent::NewTopic: return "new-topic";
    }
    return "none";
}

inline std::string_view to_string(synth::FrameVariant v) {
    switch (v) {
        case synth::FrameVariant::Normal: return "normal";
        case synth::FrameVariant::Title: return "title";
        case synth::FrameVariant::Slide: return "slide";
        case synth::FrameVariant::Fade: return "fade";
        case synth::FrameVariant::GreenSlide: return "green-slide";
    }
    return "normal";
}

inline std::string synth_file_name(std::size_t k, const synth::FrameTruth& t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", k + 1);
    return buf + t.file_suffix() + ".png";
}

/// Frames as `NNNN[_title|_ppt].png`, manifest.json and truth.json.
inline void write_lecture(const synth::Lecture& lec, const fs::path& dir, const std::string& title, unsigned threads,
                          double interval_s = 22.5) {
    fs::create_directories(dir);
    parallel_for(lec.frames.size(), threads,
                 [&](std::size_t k) { write_png(lec.frames[k], dir / synth_file_name(k, lec.truth[k])); });
    json manifest;
    manifest["video"] = {{"title", title}, {"duration_s", interval_s * lec.frames.size()}, {"video_url_template", ""}};
    json frames = json::array(), truth = json::array();
    for (std::size_t k = 0; k < lec.frames.size(); ++k) {
        const auto& t = lec.truth[k];
        const std::string file = synth_file_name(k, t);
        frames.push_back({{"file", file}, {"timestamp_s", interval_s * k}});
        truth.push_back({{"file", file},
                         {"media_type", std::string(to_string(t.media))},
                         {"topic", t.topic >= 0 ? json(t.topic) : json(nullptr)},
                         {"variant", std::string(to_string(t.variant))},
                         {"event", std::string(to_string(t.event))}});
    }
    manifest["frames"] = std::move(frames);
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
    std::ofstream(dir / "truth.json") << json{{"topics", lec.topics}, {"frames", std::move(truth)}}.dump(2) << '\n';
}

inline int cmd_synth(const std::string& profile, int frames, std::uint64_t seed, const fs::path& out_dir,
                     unsigned threads, std::ostream& out, std::ostream& err) {
    try {
        const auto script = synth::make_script(synth::profile_from_string(profile), frames, seed);
        const auto lec = synth::gen_lecture(script);
        write_lecture(lec, out_dir, "synthetic " + profile + " lecture, seed " + std::to_string(seed), threads);
        out << "frames=" << lec.frames.size() << " topics=" << lec.topics << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace lectureseg
