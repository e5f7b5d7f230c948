#include "mfhar/temporal.hpp"

#include <algorithm>
#include <array>

#include "mfhar/error.hpp"

namespace mfhar {

bool should_sample(std::int64_t frame_index, const SamplerConfig& config) {
    if (config.period < 1) {
        throw PreconditionError("sampling period must be >= 1");
    }
    if (frame_index < 0) {
        throw PreconditionError("frame index must be >= 0");
    }
    return frame_index % config.period == 0;
}

std::string_view to_string(FrameLabel label) noexcept {
    switch (label) {
        case FrameLabel::Positive:
            return "positive";
        case FrameLabel::Negative:
            return "negative";
        case FrameLabel::Absent:
            return "absent";
    }
    return "absent";
}

std::string_view to_string(EventState s) noexcept {
    return s == EventState::Raised ? "raised" : "cleared";
}

FrameLabel frame_label(std::span<const DetectionVerdict> verdicts) noexcept {
    if (verdicts.empty()) {
        return FrameLabel::Absent;
    }
    const bool any = std::any_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.positive; });
    return any ? FrameLabel::Positive : FrameLabel::Negative;
}

FrameLabel aggregate(std::span<const FrameLabel> window) {
    if (window.empty()) {
        throw PreconditionError("cannot aggregate an empty window");
    }
    std::array<std::size_t, 3> hist{};
    for (FrameLabel l : window) {
        ++hist[static_cast<std::size_t>(l)];
    }
    // Tie priority: non-alarm labels first.
    constexpr FrameLabel kPriority[] = {FrameLabel::Negative, FrameLabel::Absent, FrameLabel::Positive};
    FrameLabel best = kPriority[0];
    for (FrameLabel l : kPriority) {
        if (hist[static_cast<std::size_t>(l)] > hist[static_cast<std::size_t>(best)]) {
            best = l;
        }
    }
    return best;
}

std::int64_t aggregate_counts(std::span<const std::int64_t> window, const ComplianceRange& range) {
    if (window.empty()) {
        throw PreconditionError("cannot aggregate an empty window");
    }
    std::map<std::int64_t, std::size_t> hist;
    for (auto c : window) ++hist[c];
    auto better = [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        const bool ca = range.contains(a.first);
        const bool cb = range.contains(b.first);
        if (ca != cb) return ca;
        return a.first < b.first;
    };
    auto best = hist.begin();
    for (auto it = hist.begin(); it != hist.end(); ++it) {
        if (better(*it, *best)) best = it;
    }
    return best->first;
}

StreamAggregator::StreamAggregator(std::string stream_id, SamplerConfig config, ComplianceRange on_duty)
    : stream_id_(std::move(stream_id)), config_(config), on_duty_(on_duty) {
    if (config_.window < 1 || config_.period < 1) {
        throw PreconditionError("sampler period and window must be >= 1");
    }
    on_duty_.validate();
}

std::vector<ActionEvent> StreamAggregator::step(const FrameVerdict& verdict) {
    if (verdict.stream_id != stream_id_) {
        throw PreconditionError("verdict for stream '" + verdict.stream_id + "' fed to aggregator of '" +
                                stream_id_ + "'");
    }
    if (last_frame_ && verdict.frame_index <= *last_frame_) {
        throw OutOfOrderFrameError("stream '" + stream_id_ + "': frame " + std::to_string(verdict.frame_index) +
                                   " does not follow " + std::to_string(*last_frame_));
    }
    last_frame_ = verdict.frame_index;

    // Merge both maps so that events come out in a single action order.
    std::map<ActionKind, std::pair<std::int64_t, bool>> inputs;
    for (const auto& [action, label] : verdict.labels) {
        inputs.emplace(action, std::pair{static_cast<std::int64_t>(label), false});
    }
    for (const auto& [action, count] : verdict.counts) {
        if (!inputs.emplace(action, std::pair{count, true}).second) {
            throw PreconditionError("action '" + action.str() + "' has both a label and a count");
        }
    }
    std::vector<ActionEvent> events;
    for (const auto& [action, input] : inputs) {
        auto& ch = channels_[action];
        if (auto ev = push(action, ch, verdict.frame_index, input.first, input.second)) {
            events.push_back(std::move(*ev));
        }
    }
    return events;
}

std::optional<ActionEvent> StreamAggregator::push(const ActionKind& action, Channel& ch, std::int64_t frame,
                                                  std::int64_t value, bool is_count) {
    const auto window = static_cast<std::size_t>(config_.window);
    if (ch.frames.empty()) {
        ch.frames.assign(window, 0);
        ch.values.assign(window, 0);
    }
    ch.frames[ch.head] = frame;
    ch.values[ch.head] = value;
    ch.head = (ch.head + 1) % window;
    ch.filled = std::min(ch.filled + 1, window);
    if (ch.filled < window) {
        return std::nullopt;
    }

    // Oldest sample sits at head once the ring is full.
    std::vector<std::int64_t> ordered(window);
    std::int64_t window_start = ch.frames[ch.head];
    for (std::size_t i = 0; i < window; ++i) {
        ordered[i] = ch.values[(ch.head + i) % window];
    }

    ActionEvent ev{stream_id_, action};
    ev.window_start = window_start;
    ev.window_end = frame;
    ev.window_size = config_.window;

    bool alarm = false;
    if (is_count) {
        const auto mode = aggregate_counts(ordered, on_duty_);
        const auto verdict = check_compliance(mode, on_duty_);
        alarm = !verdict.compliant;
        ev.vote_count = std::count(ordered.begin(), ordered.end(), mode);
        ev.count = verdict;
        ch.global = alarm ? FrameLabel::Positive : FrameLabel::Negative;
    } else {
        std::vector<FrameLabel> labels(window);
        std::transform(ordered.begin(), ordered.end(), labels.begin(),
                       [](std::int64_t v) { return static_cast<FrameLabel>(v); });
        const auto global = aggregate(labels);
        alarm = global == FrameLabel::Positive;
        ev.vote_count = std::count(labels.begin(), labels.end(), global);
        ch.global = global;
    }

    if (alarm == ch.alarm) {
        return std::nullopt;
    }
    ch.alarm = alarm;
    ev.state = alarm ? EventState::Raised : EventState::Cleared;
    return ev;
}

std::optional<FrameLabel> StreamAggregator::global_label(const ActionKind& action) const {
    const auto it = channels_.find(action);
    if (it == channels_.end()) return std::nullopt;
    return it->second.global;
}

}  // namespace mfhar
