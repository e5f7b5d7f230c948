#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mfhar/detection.hpp"

namespace mfhar {

/// Inclusive [min, max] person count; max absent means unbounded.
struct ComplianceRange {
    std::int64_t min_count = 1;
    std::optional<std::int64_t> max_count;

    /// Throws PreconditionError when min < 0 or max < min.
    void validate() const;
    bool contains(std::int64_t count) const noexcept;

    bool operator==(const ComplianceRange&) const = default;
};

enum class CountDirection { Under, Over, Ok };

std::string_view to_string(CountDirection d) noexcept;

struct CountVerdict {
    std::int64_t count = 0;
    bool compliant = true;
    CountDirection direction = CountDirection::Ok;

    bool operator==(const CountVerdict&) const = default;
};

/// Fraction of the smaller box covered by the intersection.
double containment_ratio(const Box& a, const Box& b) noexcept;

/// Drops less complete detections nested inside a more complete one.
///
/// For every pair of different forms whose containment exceeds `threshold`,
/// the less complete form (Part < Upper < Whole) is removed. Same-form pairs
/// are left alone. The result keeps input order and does not depend on it.
std::vector<Detection> dedup_cross_form(std::span<const Detection> detections, double threshold);

inline std::int64_t count_persons(std::span<const Detection> deduped) noexcept {
    return static_cast<std::int64_t>(deduped.size());
}

CountVerdict check_compliance(std::int64_t count, const ComplianceRange& range);

}  // namespace mfhar
