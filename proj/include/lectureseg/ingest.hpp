#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "image.hpp"
#include "image_io.hpp"
#include "parallel.hpp"

namespace lectureseg {

struct ManifestEntry {
    std::string file;
    double timestamp_s = 0;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    VideoInfo video;
};

struct IngestConfig {
    std::string title_suffix = "_title";
    std::string slide_suffix = "_ppt";
    double frame_interval_s = 22.5;
    int min_edge = 32;
};

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Manifest parse_manifest(const nlohmann::json& j) {
    Manifest m;
    if (j.contains("video")) {
        const auto& v = j.at("video");
        m.video.title = v.value("title", std::string());
        if (v.contains("duration_s") && !v.at("duration_s").is_null()) m.video.duration_s = v.at("duration_s").get<double>();
        m.video.video_url_template = v.value("video_url_template", std::string());
    }
    double last = -1;
    if (j.contains("frames"))
        for (const auto& e : j.at("frames")) {
            ManifestEntry me{e.at("file").get<std::string>(), e.at("timestamp_s").get<double>()};
            if (me.timestamp_s < 0) throw IngestError("manifest: negative timestamp for " + me.file);
            if (me.timestamp_s < last) throw IngestError("manifest: timestamps decrease at " + me.file);
            last = me.timestamp_s;
            m.entries.push_back(std::move(me));
        }
    return m;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open manifest " + path.string());
    try {
        return parse_manifest(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw IngestError("malformed manifest: " + std::string(e.what()));
    }
}

inline NameHint name_hint_for(const std::string& stem, const IngestConfig& cfg) {
    auto ends_with = [&](const std::string& suffix) {
        return !suffix.empty() && stem.size() >= suffix.size() &&
               stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(cfg.title_suffix)) return NameHint::Title;
    if (ends_with(cfg.slide_suffix)) return NameHint::Slide;
    return NameHint::None;
}

/// Title frames are podium shots, slide frames computer shots; the rest go
/// to the visual classifier.
inline KeyFrame preclassify_by_name(KeyFrame frame) {
    switch (frame.name_hint) {
        case NameHint::Title:
            frame.media_type = MediaType::Podium;
            frame.label_source = LabelSource::Filename;
            break;
        case NameHint::Slide:
            frame.media_type = MediaType::Computer;
            frame.label_source = LabelSource::Filename;
            break;
        case NameHint::None: break;
    }
    return frame;
}

struct IngestResult {
    std::vector<KeyFrame> frames;
    std::vector<Raster> images;
    std::vector<std::string> warnings;
    int skipped = 0;
};

/// Reads `NNNN[suffix].png|jpg` files in numeric-prefix order.
inline IngestResult scan_key_frames(const std::filesystem::path& dir, const std::optional<Manifest>& manifest = {},
                                    const IngestConfig& cfg = {}, unsigned threads = 1) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IngestError("cannot read input directory " + dir.string());

    struct Candidate {
        long number;
        fs::path path;
    };
    std::vector<Candidate> files;
    IngestResult res;
    fs::directory_iterator it(dir, ec);
    if (ec) throw IngestError("cannot read input directory " + dir.string());
    for (const auto& entry : it) {
        if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
        const std::string stem = entry.path().stem().string();
        std::size_t digits = 0;
        while (digits < stem.size() && std::isdigit(static_cast<unsigned char>(stem[digits]))) ++digits;
        if (digits == 0) {
            res.warnings.push_back("skipping " + entry.path().filename().string() + ": no numeric prefix");
            ++res.skipped;
            continue;
        }
        files.push_back({std::stol(stem.substr(0, digits)), entry.path()});
    }
    std::sort(files.begin(), files.end(), [](const Candidate& a, const Candidate& b) {
        return a.number != b.number ? a.number < b.number : a.path.filename() < b.path.filename();
    });

    std::vector<std::optional<Raster>> decoded(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) { decoded[i] = read_image(files[i].path); });

    std::map<std::string, double> stamps;
    if (manifest)
        for (const auto& e : manifest->entries) stamps[e.file] = e.timestamp_s;

    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = files[i].path.filename().string();
        if (!decoded[i]) {
            res.warnings.push_back("skipping " + name + ": not a decodable PNG/JPEG");
            ++res.skipped;
            continue;
        }
        if (decoded[i]->width() < cfg.min_edge || decoded[i]->height() < cfg.min_edge) {
            res.warnings.push_back("skipping " + name + ": smaller than 32x32");
            ++res.skipped;
            continue;
        }
        KeyFrame f;
        f.seq = static_cast<int>(res.frames.size());
        f.id = files[i].path.stem().string();
        f.source_path = name;
        f.name_hint = name_hint_for(f.id, cfg);
        auto st = stamps.find(name);
        f.timestamp_s = st != stamps.end() ? st->second : f.seq * cfg.frame_interval_s;
        res.frames.push_back(std::move(f));
        res.images.push_back(std::move(*decoded[i]));
    }
    if (res.frames.empty()) throw IngestError("no decodable key frames in " + dir.string());
    return res;
}

/// Area-averaging downscale so the longer edge equals `max_edge`. Images that
/// already fit are returned unchanged.
inline Raster make_thumbnail(const Raster& img, int max_edge = 160) {
    if (max_edge < 16) throw std::invalid_argument("max_edge must be at least 16");
    const int w = img.width(), h = img.height();
    if (std::max(w, h) <= max_edge) return img;
    int nw, nh;
    if (w >= h) {
        nw = max_edge;
        nh = std::max(1, static_cast<int>(std::lround(double(h) * max_edge / w)));
    } else {
        nh = max_edge;
        nw = std::max(1, static_cast<int>(std::lround(double(w) * max_edge / h)));
    }
    struct Tap {
        int src;
        double weight;
    };
    auto taps = [](int src_len, int dst_len) {
        std::vector<std::vector<Tap>> out(dst_len);
        const double ratio = double(src_len) / dst_len;
        for (int d = 0; d < dst_len; ++d) {
            const double a = d * ratio, b = (d + 1) * ratio;
            for (int s = static_cast<int>(std::floor(a)); s < std::min<double>(src_len, std::ceil(b)); ++s) {
                const double wgt = std::min<double>(b, s + 1) - std::max<double>(a, s);
                if (wgt > 1e-12) out[d].push_back({s, wgt});
            }
        }
        return out;
    };
    const auto tx = taps(w, nw), ty = taps(h, nh);
    Raster out(nw, nh);
    for (int y = 0; y < nh; ++y)
        for (int x = 0; x < nw; ++x) {
            double r = 0, g = 0, b = 0, area = 0;
            for (const Tap& vy : ty[y])
                for (const Tap& vx : tx[x]) {
                    const double wgt = vx.weight * vy.weight;
                    const Rgb p = img.at(vx.src, vy.src);
                    r += wgt * p.r;
                    g += wgt * p.g;
                    b += wgt * p.b;
                    area += wgt;
                }
            out.at(x, y) = Rgb{static_cast<std::uint8_t>(std::lround(r / area)),
                               static_cast<std::uint8_t>(std::lround(g / area)),
                               static_cast<std::uint8_t>(std::lround(b / area))};
        }
    return out;
}

}  // namespace lectureseg
