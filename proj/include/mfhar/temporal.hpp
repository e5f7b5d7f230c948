#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfhar/classification.hpp"
#include "mfhar/onduty.hpp"
#include "mfhar/routing.hpp"

namespace mfhar {

struct SamplerConfig {
    /// Frames per sample.
    std::int64_t period = 5;
    /// Samples per decision.
    std::int64_t window = 5;

    bool operator==(const SamplerConfig&) const = default;
};

bool should_sample(std::int64_t frame_index, const SamplerConfig& config);

enum class FrameLabel : std::uint8_t { Positive, Negative, Absent };

std::string_view to_string(FrameLabel label) noexcept;

/// Positive if any verdict is positive, negative if all are negative, absent if none.
FrameLabel frame_label(std::span<const DetectionVerdict> verdicts) noexcept;

/// Most frequent label; ties resolve negative, then absent, then positive.
/// Throws PreconditionError on an empty window.
FrameLabel aggregate(std::span<const FrameLabel> window);

/// Most frequent count; ties prefer a compliant count, then the smaller one.
std::int64_t aggregate_counts(std::span<const std::int64_t> window, const ComplianceRange& range);

/// Per-sampled-frame outcome for one stream.
struct FrameVerdict {
    std::string stream_id;
    std::int64_t frame_index = 0;
    std::int64_t timestamp_ms = 0;
    /// Label per classifier-handled action.
    std::map<ActionKind, FrameLabel> labels;
    /// Deduped person count per counter-handled action.
    std::map<ActionKind, std::int64_t> counts;
    std::vector<DetectionVerdict> support;
};

enum class EventState { Raised, Cleared };

std::string_view to_string(EventState s) noexcept;

struct ActionEvent {
    std::string stream_id;
    ActionKind action;
    EventState state = EventState::Raised;
    std::int64_t window_start = 0;
    std::int64_t window_end = 0;
    /// Occurrences of the winning label (or count) inside the window.
    std::int64_t vote_count = 0;
    std::int64_t window_size = 0;
    /// Winning count and its verdict, for counter-handled actions.
    std::optional<CountVerdict> count;

    bool operator==(const ActionEvent&) const = default;
};

/// Ring-buffered majority aggregation for all actions of one stream.
///
/// Single writer: exactly one stream context calls step().
class StreamAggregator {
public:
    StreamAggregator(std::string stream_id, SamplerConfig config, ComplianceRange on_duty = {});

    /// Pushes one sampled frame and returns the transitions it caused, in
    /// action order. Throws OutOfOrderFrameError unless the frame index
    /// advances past the last one seen.
    std::vector<ActionEvent> step(const FrameVerdict& verdict);

    /// Current global label per action once its window is full.
    std::optional<FrameLabel> global_label(const ActionKind& action) const;

    const std::string& stream_id() const noexcept { return stream_id_; }

private:
    struct Channel {
        std::vector<std::int64_t> frames;  // ring of frame indices
        std::vector<std::int64_t> values;  // ring of labels (as ints) or counts
        std::size_t head = 0;
        std::size_t filled = 0;
        bool alarm = false;
        std::optional<FrameLabel> global;
    };

    std::optional<ActionEvent> push(const ActionKind& action, Channel& ch, std::int64_t frame, std::int64_t value,
                                    bool is_count);

    std::string stream_id_;
    SamplerConfig config_;
    ComplianceRange on_duty_;
    std::optional<std::int64_t> last_frame_;
    std::map<ActionKind, Channel> channels_;
};

}  // namespace mfhar
