#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfhar/classification.hpp"
#include "mfhar/config.hpp"
#include "mfhar/detection.hpp"
#include "mfhar/evaluation.hpp"
#include "mfhar/sinks.hpp"
#include "mfhar/temporal.hpp"

namespace mfhar {

/// Detector and classifier instances owned by one stream context.
struct StreamBackends {
    std::unique_ptr<Detector> detector;
    std::map<std::string, std::unique_ptr<Classifier>> classifiers;
};

/// Loads the configured backends. Fixture and model errors surface here,
/// before any frame is read.
StreamBackends make_backends(const ValidatedConfig& config);

enum class Stage : std::size_t { Ingest, Detect, Route, Classify, Aggregate, Emit };
inline constexpr std::size_t kStageCount = 6;
std::string_view to_string(Stage s) noexcept;

/// Nanoseconds spent per stage on one frame.
using StageTimes = std::array<std::int64_t, kStageCount>;

struct FrameOutcome {
    bool sampled = false;
    /// Set for sampled frames.
    std::optional<FrameVerdict> verdict;
    std::vector<EventLogEntry> entries;
};

/// Sequential detect, route, classify and aggregate for one stream.
class StreamProcessor {
public:
    using Clock = std::function<std::int64_t()>;

    StreamProcessor(const PipelineConfig& config, std::string stream_id, StreamBackends& backends, Clock clock);

    /// Processes one frame. Unsampled frames only advance the order check.
    /// Throws OutOfOrderFrameError for a non-advancing index and backend
    /// errors from the detector or classifiers; the stream state is unchanged
    /// in either case.
    FrameOutcome process(const Frame& frame, StageTimes* times = nullptr);

    const StreamAggregator& aggregator() const noexcept { return aggregator_; }

private:
    FrameVerdict analyse(const Frame& frame, StageTimes* times);

    const PipelineConfig& config_;
    std::string stream_id_;
    StreamBackends& backends_;
    Clock clock_;
    StreamAggregator aggregator_;
    std::optional<std::int64_t> last_index_;
    /// The last `window` sampled verdicts, oldest first.
    std::deque<FrameVerdict> history_;
};

/// Wall-clock milliseconds, or a constant 0 when `fixed`.
StreamProcessor::Clock make_clock(bool fixed);

struct StreamSummary {
    std::string stream_id;
    std::int64_t frames = 0;
    std::int64_t sampled = 0;
    std::int64_t frame_errors = 0;
    std::int64_t events = 0;
};

struct RunSummary {
    std::vector<StreamSummary> streams;
    std::vector<SinkStats> sinks;
    /// First few per-frame error messages.
    std::vector<std::string> errors;
};

struct RunOptions {
    bool fixed_clock = false;
    /// Process streams round-robin on the calling thread instead of one thread
    /// per stream. Implied by fixed_clock so logs are reproducible.
    bool synchronous = false;
    /// Extra sinks, e.g. the primary event log.
    std::vector<EventSink*> extra_sinks;
    /// Caps every source (and sizes synthetic ones).
    std::optional<std::int64_t> frames;
    /// Called for every sampled frame after aggregation, on the stream's context.
    std::function<void(const FrameVerdict&, const StreamAggregator&)> observer;
    /// Per-frame stage timings, on the stream's context.
    std::function<void(const std::string& stream_id, bool sampled, const StageTimes&)> timing;
    /// Skip the sinks listed in the config.
    bool config_sinks = true;
};

/// Runs every stream to the end of its source and flushes all sinks.
RunSummary run_pipeline(const ValidatedConfig& config, const RunOptions& options);

/// Runs the pipeline synchronously and scores predicted labels against `truth`.
MetricReport evaluate_pipeline(const ValidatedConfig& config, std::span<const TruthEntry> truth);

struct LatencySummary {
    std::int64_t samples = 0;
    double p50_us = 0.0;
    double p90_us = 0.0;
    double p99_us = 0.0;
};

struct BenchRow {
    /// Stream id, or "all" for the aggregate row.
    std::string stream_id;
    std::int64_t frames = 0;
    double seconds = 0.0;
    double fps = 0.0;
    std::array<LatencySummary, kStageCount> stages{};
};

struct BenchReport {
    /// Per-stream rows followed by the aggregate; empty when no frame was processed.
    std::vector<BenchRow> rows;
};

/// Pushes `frames` frames through every stream (sinks from the config are not used).
BenchReport bench_pipeline(const ValidatedConfig& config, std::int64_t frames);

/// Nearest-rank percentile of nanosecond samples, in microseconds.
LatencySummary summarize_latencies(std::vector<std::int64_t> ns);

std::string render_bench(const BenchReport& report);
std::string render_bench_json(const BenchReport& report);

}  // namespace mfhar
