// mfhar command-line front end.

#include <fstream>
#include <iterator>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfhar/annotation.hpp"
#include "mfhar/config.hpp"
#include "mfhar/error.hpp"
#include "mfhar/evaluation.hpp"
#include "mfhar/pipeline.hpp"
#include "mfhar/simd/kernels.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFailure = 1;

mfhar::ValidatedConfig load_or_default(const std::string& path) {
    return path.empty() ? mfhar::validate("") : mfhar::load_config(path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mfhar::Error("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw mfhar::Error("cannot write " + path);
    out << text;
}

void print_summary(const mfhar::RunSummary& s) {
    for (const auto& st : s.streams) {
        std::cerr << "stream " << st.stream_id << ": " << st.frames << " frames, " << st.sampled << " sampled, "
                  << st.events << " events, " << st.frame_errors << " frame errors\n";
    }
    for (std::size_t i = 0; i < s.sinks.size(); ++i) {
        const auto& k = s.sinks[i];
        std::cerr << "sink " << i << ": " << k.delivered << " delivered, " << k.dropped() << " dropped ("
                  << k.dropped_overflow << " overflow, " << k.dropped_failed << " failed), " << k.retries
                  << " retries\n";
    }
    for (const auto& e : s.errors) std::cerr << "error: " << e << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-form human action recognition pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    app.footer("\nCONFIGURATION SCHEMA\n" + mfhar::render_schema());

    bool fixed_clock = false;
    app.add_flag("--fixed-clock", fixed_clock, "Stamp events with timestamp 0 and process streams in order");

    std::string config_path;
    std::string event_log;
    auto* run = app.add_subcommand("run", "Process every configured stream and emit events");
    run->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--event-log", event_log, "JSON-lines event log (default: stdout)");

    std::string truth_path;
    std::string json_out;
    std::string protocol;
    auto* evaluate = app.add_subcommand("evaluate", "Run offline and score against frame labels");
    evaluate->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--truth", truth_path, "Lines '<frame_index> <action> <p|n>'")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--protocol", protocol, "frame | event (overrides the config)")
        ->check(CLI::IsMember({"frame", "event"}));
    evaluate->add_option("--json", json_out, "Also write the report as JSON");

    std::string coco_path;
    std::string out_dir;
    std::string actions_path;
    auto* convert = app.add_subcommand("convert", "Derive body-form labels from COCO keypoints");
    convert->add_option("--coco", coco_path, "COCO keypoint annotation file")->required()->check(CLI::ExistingFile);
    convert->add_option("--out", out_dir, "Output directory")->required();
    convert->add_option("--actions", actions_path, "Sidecar '<annotation_id> <action_class>' lines")
        ->check(CLI::ExistingFile);
    convert->add_option("--config", config_path, "Config supplying annotation rules")->check(CLI::ExistingFile);

    std::int64_t frames = 0;
    auto* bench = app.add_subcommand("bench", "Measure throughput and per-stage latency");
    bench->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    bench->add_option("--frames", frames, "Frames per stream")->required()->check(CLI::NonNegativeNumber);
    bench->add_option("--json", json_out, "Also write the report as JSON");

    bool schema = false;
    auto* print = app.add_subcommand("print-config", "Print the effective configuration");
    print->add_option("--config", config_path, "Config file (JSON); defaults when omitted")
        ->check(CLI::ExistingFile);
    print->add_flag("--schema", schema, "Print the schema with provenance of defaults instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version arrive here too, with a zero code.
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            const auto cfg = mfhar::load_config(config_path);
            std::optional<mfhar::JsonlSink> log;
            if (event_log.empty()) {
                log.emplace(std::cout);
            } else {
                log.emplace(std::filesystem::path(event_log));
            }
            mfhar::RunOptions opts;
            opts.fixed_clock = fixed_clock;
            opts.extra_sinks.push_back(&*log);
            print_summary(mfhar::run_pipeline(cfg, opts));
            std::cerr << "simd: " << mfhar::simd::to_string(mfhar::simd::active().level) << "\n";
        } else if (*evaluate) {
            auto cfg = mfhar::load_config(config_path);
            if (!protocol.empty()) cfg.config.evaluation.protocol = *mfhar::parse_protocol(protocol);
            const auto truth = mfhar::parse_ground_truth(read_text(truth_path));
            const auto report = mfhar::evaluate_pipeline(cfg, truth);
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "protocol: " << mfhar::to_string(report.protocol) << " (absent scored as negative)\n"
                      << mfhar::render_table(report);
            if (!json_out.empty()) write_text(json_out, mfhar::render_json(report));
        } else if (*convert) {
            const auto cfg = load_or_default(config_path);
            std::optional<std::filesystem::path> sidecar;
            if (!actions_path.empty()) sidecar = actions_path;
            const auto out = mfhar::convert_files(coco_path, out_dir, cfg.config.annotation, sidecar);
            for (const auto& w : out.result.warnings) std::cerr << "warning: " << w << "\n";
            if (out.subsets) {
                for (const auto& m : out.subsets->mismatches) {
                    std::cerr << "mismatch: annotation " << m.annotation_id << " (" << m.action_class
                              << "): " << m.reason << "\n";
                }
            }
            std::cout << out.result.stats.to_json();
        } else if (*bench) {
            const auto cfg = mfhar::load_config(config_path);
            const auto report = mfhar::bench_pipeline(cfg, frames);
            std::cout << mfhar::render_bench(report);
            if (!json_out.empty()) write_text(json_out, mfhar::render_bench_json(report));
        } else if (*print) {
            if (schema) {
                std::cout << mfhar::render_schema() << "\nDefault provenance:\n";
                for (const auto& [path, note] : mfhar::default_provenance()) {
                    std::cout << "  " << path << ": " << note << "\n";
                }
            } else {
                std::cout << mfhar::print_effective(load_or_default(config_path).config);
            }
        }
    } catch (const mfhar::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}
