#include "mfhar/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mfhar/error.hpp"
#include "mfhar/frame_source.hpp"
#include "mfhar/image.hpp"
#include "mfhar/onduty.hpp"
#include "mfhar/routing.hpp"

namespace mfhar {

namespace {

using SteadyClock = std::chrono::steady_clock;

std::int64_t elapsed_ns(SteadyClock::time_point since) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(SteadyClock::now() - since).count();
}

void add_time(StageTimes* times, Stage s, SteadyClock::time_point since) {
    if (times) (*times)[static_cast<std::size_t>(s)] += elapsed_ns(since);
}

constexpr std::size_t kMaxRecordedErrors = 20;

}  // namespace

std::string_view to_string(Stage s) noexcept {
    static constexpr std::string_view kNames[] = {"ingest", "detect", "route", "classify", "aggregate", "emit"};
    return kNames[static_cast<std::size_t>(s)];
}

StreamBackends make_backends(const ValidatedConfig& vc) {
    const auto& cfg = vc.config;
    StreamBackends b;
    const auto& d = cfg.detector;
    if (d.backend == "network") {
        b.detector = std::make_unique<NetworkDetector>(vc.resolve(d.model), d.params);
    } else if (d.fixture.empty()) {
        b.detector = std::make_unique<ScriptedDetector>(std::map<std::int64_t, std::vector<Candidate>>{}, d.params);
    } else {
        b.detector = std::make_unique<ScriptedDetector>(ScriptedDetector::load(vc.resolve(d.fixture), d.params));
    }
    const Extent canvas = cfg.crop.extent();
    for (const auto& [name, c] : cfg.classifiers) {
        if (c.backend == "network") {
            b.classifiers.emplace(name, std::make_unique<NetworkClassifier>(vc.resolve(c.model), c.label_set(), canvas));
        } else if (c.fixture.empty()) {
            b.classifiers.emplace(name, std::make_unique<ScriptedClassifier>(
                                            ScriptedClassifier::parse("", c.label_set(), c.fallback, canvas)));
        } else {
            b.classifiers.emplace(name, std::make_unique<ScriptedClassifier>(ScriptedClassifier::load(
                                            vc.resolve(c.fixture), c.label_set(), c.fallback, canvas)));
        }
    }
    return b;
}

StreamProcessor::Clock make_clock(bool fixed) {
    if (fixed) return [] { return std::int64_t{0}; };
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
}

StreamProcessor::StreamProcessor(const PipelineConfig& config, std::string stream_id, StreamBackends& backends,
                                 Clock clock)
    : config_(config),
      stream_id_(std::move(stream_id)),
      backends_(backends),
      clock_(std::move(clock)),
      aggregator_(stream_id_, config.sampler, config.on_duty.range) {
    for (const auto& rule : config_.registry.rules()) {
        if (rule.handler.kind == Handler::Kind::Classifier && !backends_.classifiers.contains(rule.handler.classifier)) {
            throw PreconditionError("no classifier instance for binding '" + rule.handler.classifier + "'");
        }
    }
    if (!backends_.detector) throw PreconditionError("stream backends have no detector");
}

FrameVerdict StreamProcessor::analyse(const Frame& frame, StageTimes* times) {
    auto t = SteadyClock::now();
    const auto detections = backends_.detector->detect(frame);
    add_time(times, Stage::Detect, t);

    t = SteadyClock::now();
    const auto routed = route_indices(detections, config_.registry);
    add_time(times, Stage::Route, t);

    t = SteadyClock::now();
    FrameVerdict v{stream_id_, frame.index, frame.timestamp_ms, {}, {}, {}};
    std::vector<std::optional<Image>> crops(detections.size());
    const auto canvas = config_.crop.extent();
    for (const auto& rule : config_.registry.rules()) {
        const auto it = routed.find(rule.action);
        const auto& indices = it == routed.end() ? std::vector<std::size_t>{} : it->second;
        if (rule.handler.kind == Handler::Kind::Counter) {
            std::vector<Detection> eligible;
            eligible.reserve(indices.size());
            for (auto i : indices) eligible.push_back(detections[i]);
            const auto kept = dedup_cross_form(eligible, config_.on_duty.containment_threshold);
            v.counts.emplace(rule.action, count_persons(kept));
            for (const auto& k : kept) {
                const auto pos = std::find(detections.begin(), detections.end(), k) - detections.begin();
                v.support.push_back(DetectionVerdict{k, static_cast<std::size_t>(pos), rule.action, true,
                                                     k.confidence, "person"});
            }
            continue;
        }
        auto& classifier = *backends_.classifiers.at(rule.handler.classifier);
        const auto& binding = config_.classifiers.at(rule.handler.classifier);
        const auto first = v.support.size();
        for (auto i : indices) {
            if (!crops[i]) {
                crops[i] = crop_to_canvas(frame.image, detections[i].box, canvas,
                                          static_cast<std::uint8_t>(config_.crop.fill));
            }
            const auto dist = classifier.classify(ClassifierInput{*crops[i], frame.index, i});
            auto c = collapse(dist, classifier.labels(), binding.positive_mass_threshold);
            v.support.push_back(
                DetectionVerdict{detections[i], i, rule.action, c.positive, c.score, std::move(c.top_label)});
        }
        v.labels.emplace(rule.action,
                         frame_label(std::span<const DetectionVerdict>(v.support).subspan(first)));
    }
    add_time(times, Stage::Classify, t);
    return v;
}

FrameOutcome StreamProcessor::process(const Frame& frame, StageTimes* times) {
    if (frame.stream_id != stream_id_) {
        throw PreconditionError("frame of stream '" + frame.stream_id + "' sent to '" + stream_id_ + "'");
    }
    if (last_index_ && frame.index <= *last_index_) {
        throw OutOfOrderFrameError("stream '" + stream_id_ + "': frame " + std::to_string(frame.index) +
                                   " does not follow " + std::to_string(*last_index_));
    }
    last_index_ = frame.index;

    FrameOutcome out;
    if (!should_sample(frame.index, config_.sampler)) return out;
    out.sampled = true;

    auto verdict = analyse(frame, times);

    auto t = SteadyClock::now();
    const auto events = aggregator_.step(verdict);
    history_.push_back(verdict);
    while (history_.size() > static_cast<std::size_t>(config_.sampler.window)) history_.pop_front();
    add_time(times, Stage::Aggregate, t);

    t = SteadyClock::now();
    for (const auto& ev : events) {
        EventLogEntry e{clock_(), frame.timestamp_ms, ev, {}};
        for (const auto& h : history_) {
            if (h.frame_index < ev.window_start || h.frame_index > ev.window_end) continue;
            for (const auto& s : h.support) {
                if (s.action == ev.action) e.support.push_back(s);
            }
        }
        out.entries.push_back(std::move(e));
    }
    add_time(times, Stage::Emit, t);
    out.verdict = std::move(verdict);
    return out;
}

namespace {

struct StreamContext {
    const StreamConfig* stream = nullptr;
    std::unique_ptr<FrameSource> source;
    StreamBackends backends;
    std::unique_ptr<StreamProcessor> processor;
    StreamSummary summary;
    std::vector<std::string> errors;
    bool done = false;
};

/// Reads and processes one frame; false once the source is exhausted.
bool step_stream(StreamContext& ctx, const RunOptions& options, const std::vector<EventSink*>& sinks) {
    StageTimes times{};
    try {
        auto t = SteadyClock::now();
        auto frame = ctx.source->next();
        add_time(&times, Stage::Ingest, t);
        if (!frame) {
            ctx.done = true;
            return false;
        }
        ++ctx.summary.frames;
        auto out = ctx.processor->process(*frame, &times);
        if (out.sampled) ++ctx.summary.sampled;
        t = SteadyClock::now();
        for (const auto& e : out.entries) {
            for (auto* s : sinks) s->publish(e);
        }
        add_time(&times, Stage::Emit, t);
        ctx.summary.events += static_cast<std::int64_t>(out.entries.size());
        if (out.verdict && options.observer) options.observer(*out.verdict, ctx.processor->aggregator());
        if (options.timing) options.timing(ctx.summary.stream_id, out.sampled, times);
    } catch (const std::exception& e) {
        ++ctx.summary.frame_errors;
        if (ctx.errors.size() < kMaxRecordedErrors) ctx.errors.emplace_back(e.what());
    }
    return !ctx.done;
}

}  // namespace

RunSummary run_pipeline(const ValidatedConfig& vc, const RunOptions& options) {
    const auto& cfg = vc.config;

    std::vector<std::unique_ptr<EventSink>> owned;
    std::vector<EventSink*> sinks = options.extra_sinks;
    if (options.config_sinks) {
        for (const auto& s : cfg.sinks) {
            owned.push_back(make_sink(s, vc));
            sinks.push_back(owned.back().get());
        }
    }

    const auto clock = make_clock(options.fixed_clock);
    std::vector<std::unique_ptr<StreamContext>> contexts;
    for (const auto& s : cfg.streams) {
        auto ctx = std::make_unique<StreamContext>();
        ctx->stream = &s;
        ctx->summary.stream_id = s.id;
        ctx->backends = make_backends(vc);
        ctx->processor = std::make_unique<StreamProcessor>(cfg, s.id, ctx->backends, clock);
        ctx->source = open_source(s, vc, options.frames);
        contexts.push_back(std::move(ctx));
    }

    if (options.synchronous || options.fixed_clock) {
        bool any = true;
        while (any) {
            any = false;
            for (auto& ctx : contexts) {
                if (!ctx->done) any = step_stream(*ctx, options, sinks) || any;
            }
        }
    } else {
        std::vector<std::thread> threads;
        std::mutex failure_mu;
        std::exception_ptr failure;
        for (auto& ctx : contexts) {
            threads.emplace_back([&, c = ctx.get()] {
                try {
                    while (step_stream(*c, options, sinks)) {
                    }
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& t : threads) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (auto* s : sinks) s->close();

    RunSummary summary;
    for (auto& ctx : contexts) {
        summary.streams.push_back(ctx->summary);
        for (auto& e : ctx->errors) summary.errors.push_back(ctx->summary.stream_id + ": " + e);
    }
    for (auto* s : sinks) summary.sinks.push_back(s->stats());
    return summary;
}

namespace {

/// Truth label convention for counter actions: positive means the count is compliant.
FrameLabel counter_label(bool compliant) { return compliant ? FrameLabel::Positive : FrameLabel::Negative; }

struct ScoredAction {
    std::vector<FrameLabel> predicted;
    std::vector<bool> truth;
    std::array<std::int64_t, 3> tally{};
    std::int64_t expected = 0;
};

}  // namespace

MetricReport evaluate_pipeline(const ValidatedConfig& vc, std::span<const TruthEntry> truth) {
    const auto& cfg = vc.config;
    MetricReport report;
    report.protocol = cfg.evaluation.protocol;

    std::set<std::string> stream_ids;
    for (const auto& s : cfg.streams) stream_ids.insert(s.id);

    // stream -> action -> frame -> label
    std::map<std::string, std::map<std::string, std::map<std::int64_t, bool>>> wanted;
    std::set<std::string> warned;
    auto warn_once = [&](const std::string& msg) {
        if (warned.insert(msg).second) report.warnings.push_back(msg);
    };
    for (const auto& t : truth) {
        if (!cfg.registry.lookup(t.action)) {
            warn_once("ground truth for unconfigured action '" + t.action + "' skipped");
            continue;
        }
        std::string stream = t.stream_id;
        if (stream.empty()) {
            if (cfg.streams.size() != 1) {
                warn_once("ground truth without a stream id needs exactly one configured stream; skipped");
                continue;
            }
            stream = cfg.streams.front().id;
        } else if (!stream_ids.contains(stream)) {
            warn_once("ground truth for unknown stream '" + stream + "' skipped");
            continue;
        }
        wanted[stream][t.action][t.frame_index] = t.positive;
    }

    std::map<std::string, ScoredAction> scored;
    for (const auto& [stream, actions] : wanted) {
        for (const auto& [action, frames] : actions) {
            scored[action].expected += static_cast<std::int64_t>(frames.size());
        }
    }

    const auto protocol = cfg.evaluation.protocol;
    RunOptions options;
    options.fixed_clock = true;
    options.synchronous = true;
    options.config_sinks = false;
    options.observer = [&](const FrameVerdict& v, const StreamAggregator& agg) {
        const auto s = wanted.find(v.stream_id);
        if (s == wanted.end()) return;
        for (const auto& [action, frames] : s->second) {
            const auto f = frames.find(v.frame_index);
            if (f == frames.end()) continue;
            const ActionKind kind(action);
            FrameLabel predicted = FrameLabel::Absent;
            const bool is_counter = v.counts.contains(kind);
            if (protocol == ScoringProtocol::Frame) {
                if (is_counter) {
                    predicted = counter_label(check_compliance(v.counts.at(kind), cfg.on_duty.range).compliant);
                } else if (const auto l = v.labels.find(kind); l != v.labels.end()) {
                    predicted = l->second;
                }
            } else if (const auto g = agg.global_label(kind)) {
                // Counter channels hold the alarm state: positive means non-compliant.
                predicted = is_counter ? counter_label(*g == FrameLabel::Negative) : *g;
            }
            auto& a = scored[action];
            a.predicted.push_back(predicted);
            a.truth.push_back(f->second);
            ++a.tally[static_cast<std::size_t>(predicted)];
        }
    };
    const auto summary = run_pipeline(vc, options);
    for (const auto& s : summary.streams) {
        if (s.frame_errors > 0) {
            report.warnings.push_back("stream '" + s.stream_id + "': " + std::to_string(s.frame_errors) +
                                      " frame(s) failed and were not scored");
        }
    }

    for (auto& [action, a] : scored) {
        ActionReport r;
        const auto truth_flags = std::make_unique<bool[]>(a.truth.size());
        std::copy(a.truth.begin(), a.truth.end(), truth_flags.get());
        r.counts = score_frames(a.predicted, std::span<const bool>(truth_flags.get(), a.truth.size()));
        r.metrics = metrics(r.counts);
        r.predicted = a.tally;
        r.unscored = a.expected - static_cast<std::int64_t>(a.predicted.size());
        report.actions.emplace(action, r);
    }
    return report;
}

LatencySummary summarize_latencies(std::vector<std::int64_t> ns) {
    LatencySummary s;
    s.samples = static_cast<std::int64_t>(ns.size());
    if (ns.empty()) return s;
    std::sort(ns.begin(), ns.end());
    auto rank = [&](double p) {
        const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(ns.size())));
        return static_cast<double>(ns[std::clamp<std::size_t>(k, 1, ns.size()) - 1]) / 1000.0;
    };
    s.p50_us = rank(0.50);
    s.p90_us = rank(0.90);
    s.p99_us = rank(0.99);
    return s;
}

BenchReport bench_pipeline(const ValidatedConfig& vc, std::int64_t frames) {
    BenchReport report;
    if (frames <= 0 || vc.config.streams.empty()) return report;

    struct Samples {
        std::int64_t frames = 0;
        std::int64_t total_ns = 0;
        std::array<std::vector<std::int64_t>, kStageCount> stages;
    };
    std::map<std::string, Samples> per_stream;
    for (const auto& s : vc.config.streams) per_stream[s.id];

    RunOptions options;
    options.frames = frames;
    options.config_sinks = false;
    options.timing = [&](const std::string& id, bool sampled, const StageTimes& t) {
        auto& s = per_stream.find(id)->second;
        ++s.frames;
        for (std::size_t i = 0; i < kStageCount; ++i) {
            s.total_ns += t[i];
            if (i == static_cast<std::size_t>(Stage::Ingest) || sampled) s.stages[i].push_back(t[i]);
        }
    };
    const auto start = SteadyClock::now();
    run_pipeline(vc, options);
    const double wall = static_cast<double>(elapsed_ns(start)) / 1e9;

    BenchRow all{"all"};
    for (auto& [id, s] : per_stream) {
        BenchRow row{id};
        row.frames = s.frames;
        row.seconds = static_cast<double>(s.total_ns) / 1e9;
        row.fps = row.seconds > 0.0 ? static_cast<double>(row.frames) / row.seconds : 0.0;
        for (std::size_t i = 0; i < kStageCount; ++i) {
            auto& merged = all.stages[i];
            merged.samples += static_cast<std::int64_t>(s.stages[i].size());
            row.stages[i] = summarize_latencies(s.stages[i]);
        }
        all.frames += row.frames;
        report.rows.push_back(row);
    }
    if (all.frames == 0) {
        report.rows.clear();
        return report;
    }
    for (std::size_t i = 0; i < kStageCount; ++i) {
        std::vector<std::int64_t> merged;
        for (auto& [id, s] : per_stream) merged.insert(merged.end(), s.stages[i].begin(), s.stages[i].end());
        all.stages[i] = summarize_latencies(std::move(merged));
    }
    all.seconds = wall;
    all.fps = wall > 0.0 ? static_cast<double>(all.frames) / wall : 0.0;
    report.rows.push_back(all);
    return report;
}

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(digits);
    o << v;
    return o.str();
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

}  // namespace

std::string render_bench(const BenchReport& report) {
    if (report.rows.empty()) return "no frames processed\n";
    std::ostringstream out;
    for (const auto& row : report.rows) {
        out << "stream " << row.stream_id << ": " << row.frames << " frames in " << fixed(row.seconds, 3) << " s, "
            << fixed(row.fps, 1) << " frames/s\n";
        out << "  " << pad("stage", 9) << pad("samples", 10) << pad("p50 us", 11) << pad("p90 us", 11)
            << pad("p99 us", 11) << "\n";
        for (std::size_t i = 0; i < kStageCount; ++i) {
            const auto& s = row.stages[i];
            out << "  " << pad(std::string(to_string(static_cast<Stage>(i))), 9) << pad(std::to_string(s.samples), 10)
                << pad(fixed(s.p50_us, 3), 11) << pad(fixed(s.p90_us, 3), 11) << pad(fixed(s.p99_us, 3), 11) << "\n";
        }
    }
    return out.str();
}

std::string render_bench_json(const BenchReport& report) {
    using nlohmann::ordered_json;
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json stages = ordered_json::object();
        for (std::size_t i = 0; i < kStageCount; ++i) {
            const auto& s = row.stages[i];
            stages[std::string(to_string(static_cast<Stage>(i)))] = {
                {"samples", s.samples}, {"p50_us", s.p50_us}, {"p90_us", s.p90_us}, {"p99_us", s.p99_us}};
        }
        rows.push_back({{"stream_id", row.stream_id},
                        {"frames", row.frames},
                        {"seconds", row.seconds},
                        {"fps", row.fps},
                        {"stages", stages}});
    }
    return ordered_json{{"rows", rows}}.dump(2) + "\n";
}

}  // namespace mfhar
