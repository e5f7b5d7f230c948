#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfhar/annotation.hpp"
#include "mfhar/detection.hpp"
#include "mfhar/temporal.hpp"

namespace mfhar {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const noexcept { return tp + fp + tn + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept;

    bool operator==(const ConfusionCounts&) const = default;
};

/// Exact non-negative fraction; den > 0.
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    /// Percentage rounded half-up to one decimal, e.g. "99.4".
    std::string percent() const;

    bool operator==(const Ratio&) const = default;
};

/// Metrics of one action; a metric whose denominator is zero is absent.
struct MetricEntry {
    std::optional<Ratio> sensitivity;
    std::optional<Ratio> specificity;
    std::optional<Ratio> precision;
    std::optional<Ratio> recall;

    bool operator==(const MetricEntry&) const = default;
};

MetricEntry metrics(const ConfusionCounts& c);

/// Greedy matching in descending confidence order. Each prediction takes the
/// unmatched ground truth with the highest IoU above `iou_threshold` (and the
/// same body form when `form_aware`). tn is always 0.
ConfusionCounts match_detections(std::span<const Detection> predictions, std::span<const AnnotationRecord> truth,
                                 double iou_threshold, bool form_aware);

/// Cellwise confusion counts; absent predictions count as negative.
/// Throws LengthMismatchError when the sequences differ in length.
ConfusionCounts score_frames(std::span<const FrameLabel> predicted, std::span<const bool> truth);

/// How predicted labels were obtained: raw per-frame labels, or the
/// majority-aggregated label of the window ending at the frame.
enum class ScoringProtocol { Frame, Event };

std::string_view to_string(ScoringProtocol p) noexcept;
std::optional<ScoringProtocol> parse_protocol(std::string_view s) noexcept;

struct ActionReport {
    ConfusionCounts counts;
    MetricEntry metrics;
    /// Raw three-way predicted labels over scored frames (positive, negative, absent).
    std::array<std::int64_t, 3> predicted{};
    /// Ground-truth frames that were never sampled, hence not scored.
    std::int64_t unscored = 0;
};

struct MetricReport {
    ScoringProtocol protocol = ScoringProtocol::Frame;
    std::map<std::string, ActionReport> actions;
    std::vector<std::string> warnings;
};

/// Column order used by the table: fall, sleep, jump, on_duty, then the rest by name.
std::vector<std::string> report_column_order(const MetricReport& report);

/// Fixed-layout text table; absent metrics render as "—".
std::string render_table(const MetricReport& report);
std::string render_json(const MetricReport& report);

struct TruthEntry {
    /// Empty when the line has no stream prefix.
    std::string stream_id;
    std::int64_t frame_index = 0;
    std::string action;
    bool positive = false;
};

/// Lines `<frame_index> <action> <p|n>` or `<stream_id> <frame_index> <action> <p|n>`.
std::vector<TruthEntry> parse_ground_truth(std::string_view text);

}  // namespace mfhar
