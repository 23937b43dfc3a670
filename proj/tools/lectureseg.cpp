#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <lectureseg/config.hpp>
#include <lectureseg/pipeline.hpp>

using namespace lectureseg;

namespace {

// --config wins over LECTURESEG_CONFIG; neither means built-in defaults
PipelineConfig resolve_config(const std::string& path) {
    if (!path.empty()) return load_config(path);
    if (const char* env = std::getenv("LECTURESEG_CONFIG"); env && *env) return load_config(env);
    return PipelineConfig{};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topic indexing of lecture key frames"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = -1;
    app.add_option("--config", config_path, "INI config file (default: $LECTURESEG_CONFIG)");
    app.add_option("--threads", threads, "worker threads, 0 = all cores (overrides config)");

    auto* segment = app.add_subcommand("segment", "classify, cluster and index a directory of key frames");
    std::string input_dir, out_dir, debug_dir;
    segment->add_option("--input", input_dir, "directory of NNNN[_title|_ppt].png|jpg key frames")->required();
    segment->add_option("--out", out_dir, "output directory")->required();
    segment->add_option("--debug-dir", debug_dir, "write intermediate filter masks here");

    auto* classify_cmd = app.add_subcommand("classify", "print media type and features per image");
    std::vector<std::string> images;
    classify_cmd->add_option("images", images, "image files")->required();

    auto* match = app.add_subcommand("match", "match two board or sheet frames");
    std::string image_a, image_b, media = "board";
    match->add_option("image_a", image_a, "older frame")->required();
    match->add_option("image_b", image_b, "newer frame")->required();
    match->add_option("--type", media, "board or sheet")->check(CLI::IsMember({"board", "sheet"}));

    auto* stats = app.add_subcommand("stats", "event probabilities and cost-model fit of an index");
    std::string index_path;
    stats->add_option("index", index_path, "index.json")->required();

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic lecture");
    std::string profile = "linear", synth_out;
    int frames = 200;
    std::uint64_t seed = 1;
    synth_cmd->add_option("--profile", profile)->check(CLI::IsMember({"linear", "interleaved", "mixed"}));
    synth_cmd->add_option("--frames", frames)->check(CLI::Range(12, 100000));
    synth_cmd->add_option("--seed", seed);
    synth_cmd->add_option("--out", synth_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    PipelineConfig cfg;
    try {
        cfg = resolve_config(config_path);
        if (threads >= 0) cfg.threads = static_cast<unsigned>(threads);
        if (!debug_dir.empty()) cfg.debug_dir = debug_dir;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    if (*segment) return cmd_segment(input_dir, out_dir, cfg, std::cout, std::cerr);
    if (*classify_cmd) {
        std::vector<fs::path> paths(images.begin(), images.end());
        return cmd_classify(paths, cfg, std::cout, std::cerr);
    }
    if (*match)
        return cmd_match(image_a, image_b, media == "sheet" ? MediaType::Sheet : MediaType::Board, cfg, std::cout,
                         std::cerr);
    if (*stats) return cmd_stats(index_path, std::cout, std::cerr);
    return cmd_synth(profile, frames, seed, synth_out, cfg.threads, std::cout, std::cerr);
}
