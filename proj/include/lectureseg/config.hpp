#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "classifier.hpp"
#include "cluster.hpp"
#include "content_filter.hpp"
#include "ingest.hpp"
#include "matcher.hpp"

namespace lectureseg {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    ClassifierConfig classifier;
    FilterConfig filter;
    MatchConfig matcher;
    ClusterConfig cluster;
    IngestConfig ingest;
    unsigned threads = 1;
    std::optional<std::filesystem::path> debug_dir;
    int thumb_edge = 160;

    void validate() const {
        matcher.validate();
        if (thumb_edge < 16) throw ConfigError("thumb_edge must be at least 16");
        if (ingest.title_suffix == ingest.slide_suffix) throw ConfigError("title and slide suffixes must differ");
    }
};

namespace detail {

using Slot = std::variant<double*, int*, bool*, std::string*, std::size_t*, std::vector<double>*>;

inline std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_slot(const Slot& s) {
    std::ostringstream os;
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, bool>) {
                os << (*p ? "true" : "false");
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                for (std::size_t k = 0; k < p->size(); ++k) os << (k ? "," : "") << shortest((*p)[k]);
            } else if constexpr (std::is_same_v<T, double>) {
                os << shortest(*p);
            } else {
                os << *p;
            }
        },
        s);
    return os.str();
}

inline double parse_double(const std::string& key, std::string text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    std::size_t start = 0;
    while (start < text.size() && std::isspace(static_cast<unsigned char>(text[start]))) ++start;
    double v = 0;
    const auto* first = text.data() + start;
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
}

inline void parse_slot(const std::string& key, const std::string& text, const Slot& s) {
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, bool>) {
                if (text == "true" || text == "1") *p = true;
                else if (text == "false" || text == "0") *p = false;
                else throw ConfigError(key + ": expected true or false, got '" + text + "'");
            } else if constexpr (std::is_same_v<T, std::string>) {
                *p = text;
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                p->clear();
                std::stringstream ss(text);
                std::string item;
                while (std::getline(ss, item, ',')) p->push_back(parse_double(key, item));
            } else if constexpr (std::is_same_v<T, double>) {
                *p = parse_double(key, text);
            } else {
                const double v = parse_double(key, text);
                if (v != std::floor(v) || (v < 0 && std::is_same_v<T, std::size_t>))
                    throw ConfigError(key + ": expected a whole number, got '" + text + "'");
                *p = static_cast<T>(v);
            }
        },
        s);
}

// every configurable key, by section ("" is the top level)
inline std::map<std::string, std::vector<std::pair<std::string, Slot>>> config_slots(PipelineConfig& c, int& threads,
                                                                                     std::string& debug) {
    auto& cl = c.classifier;
    auto& fi = c.filter;
    auto& m = c.matcher;
    auto& pr = cl.predicates;
    return {
        {"", {{"threads", &threads}, {"debug_dir", &debug}}},
        {"classifier",
         {{"border_band", &cl.border_band},       {"black_luma_max", &cl.black_luma_max},
          {"green_band", &cl.green_band},         {"dark_luma_max", &cl.dark_luma_max},
          {"laplacian_threshold", &cl.laplacian_threshold},
          {"repeat_run", &cl.repeat_run},         {"repeat_diff", &cl.repeat_diff},
          {"bb", &cl.bb},                         {"dark", &cl.dark},
          {"green", &cl.green},                   {"green_bottom", &cl.green_bottom},
          {"green_bottom_board", &cl.green_bottom_board},
          {"green_border", &cl.green_border},     {"green_residual", &cl.green_residual},
          {"white", &cl.white},                   {"hlm", &cl.hlm},
          {"light", &cl.light},                   {"crm", &cl.crm},
          {"fade", &cl.fade},                     {"hist", &cl.hist},
          {"tail_limit", &cl.tail_limit}}},
        {"predicates",
         {{"green_hue_min", &pr.green_hue_min},   {"green_hue_max", &pr.green_hue_max},
          {"green_sat_min", &pr.green_sat_min},   {"green_val_min", &pr.green_val_min},
          {"green_val_max", &pr.green_val_max},   {"white_val_min", &pr.white_val_min},
          {"white_sat_max", &pr.white_sat_max},   {"gray_val_min", &pr.gray_val_min},
          {"gray_sat_max", &pr.gray_sat_max}}},
        {"filter",
         {{"laplacian_threshold", &fi.laplacian_threshold},
          {"similarity_run", &fi.similarity_run}, {"similarity_diff", &fi.similarity_diff},
          {"min_region_frac", &fi.min_region_frac},
          {"blob_area", &fi.blob_area},           {"blob_reference_area", &fi.blob_reference_area},
          {"blob_filter", &fi.blob_filter}}},
        {"matcher",
         {{"window_rows", &m.window_rows},        {"cc_low", &m.cc_low},
          {"cc_high", &m.cc_high},                {"scales", &m.scales},
          {"coarse_stride", &m.coarse_stride},
          {"coarse_candidates", &m.coarse_candidates},
          {"exhaustive_max_placements", &m.exhaustive_max_placements},
          {"w_n", &m.w_n},                        {"w_q", &m.w_q},
          {"w_t", &m.w_t},                        {"w_s", &m.w_s},
          {"tau_frac", &m.tau_frac},              {"score_threshold", &m.score_threshold},
          {"q_min", &m.q_min},                    {"early_reject", &m.early_reject}}},
        {"cluster", {{"board_two_way", &c.cluster.board_two_way}}},
        {"ingest",
         {{"title_suffix", &c.ingest.title_suffix}, {"slide_suffix", &c.ingest.slide_suffix},
          {"frame_interval_s", &c.ingest.frame_interval_s}, {"min_edge", &c.ingest.min_edge},
          {"thumb_edge", &c.thumb_edge}}},
    };
}

}  // namespace detail

/// Parses flat INI text. Unknown sections or keys are errors; absent keys
/// keep their defaults.
inline PipelineConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    PipelineConfig c;
    std::string debug;
    int threads = static_cast<int>(c.threads);
    auto slots = detail::config_slots(c, threads, debug);
    auto assign = [&](const std::string& section, const std::string& key, const std::string& value) {
        const auto sec = slots.find(section);
        if (sec == slots.end()) throw ConfigError("config: unknown section [" + section + "]");
        for (const auto& [name, slot] : sec->second)
            if (name == key) {
                detail::parse_slot(section.empty() ? key : section + "." + key, value, slot);
                return;
            }
        throw ConfigError("config: unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    };
    for (const auto& [name, node] : tree) {
        if (node.empty())
            assign("", name, node.data());
        else
            for (const auto& [key, leaf] : node) assign(name, key, leaf.data());
    }
    if (threads < 0) throw ConfigError("config: threads must be non-negative");
    c.threads = static_cast<unsigned>(threads);
    if (!debug.empty()) c.debug_dir = debug;
    // the filter shares the classifier's pixel predicates
    c.filter.predicates = c.classifier.predicates;
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in);
}

/// Writes every key with its current value; parse_config reads it back unchanged.
inline std::string config_to_ini(const PipelineConfig& cfg) {
    PipelineConfig c = cfg;
    std::string debug = c.debug_dir ? c.debug_dir->string() : std::string();
    int threads = static_cast<int>(c.threads);
    auto slots = detail::config_slots(c, threads, debug);
    std::ostringstream os;
    for (const auto& [name, slot] : slots[""]) os << name << " = " << detail::format_slot(slot) << '\n';
    for (const auto& [section, entries] : slots) {
        if (section.empty()) continue;
        os << "\n[" << section << "]\n";
        for (const auto& [name, slot] : entries) os << name << " = " << detail::format_slot(slot) << '\n';
    }
    return os.str();
}

}  // namespace lectureseg
