#include "mfhar/onduty.hpp"

#include "mfhar/error.hpp"

namespace mfhar {

void ComplianceRange::validate() const {
    if (min_count < 0) {
        throw PreconditionError("compliance min must be >= 0");
    }
    if (max_count && *max_count < min_count) {
        throw PreconditionError("compliance max must be >= min");
    }
}

bool ComplianceRange::contains(std::int64_t count) const noexcept {
    return count >= min_count && (!max_count || count <= *max_count);
}

std::string_view to_string(CountDirection d) noexcept {
    switch (d) {
        case CountDirection::Under:
            return "under";
        case CountDirection::Over:
            return "over";
        case CountDirection::Ok:
            return "ok";
    }
    return "ok";
}

double containment_ratio(const Box& a, const Box& b) noexcept { return containment(a, b); }

std::vector<Detection> dedup_cross_form(std::span<const Detection> detections, double threshold) {
    // A detection is dropped iff some strictly more complete detection nests it;
    // the predicate is pairwise, so the surviving set is order-independent.
    std::vector<Detection> out;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < detections.size() && !dominated; ++j) {
            dominated = detections[j].form > detections[i].form &&
                        containment(detections[i].box, detections[j].box) > threshold;
        }
        if (!dominated) {
            out.push_back(detections[i]);
        }
    }
    return out;
}

CountVerdict check_compliance(std::int64_t count, const ComplianceRange& range) {
    range.validate();
    CountVerdict v;
    v.count = count;
    if (count < range.min_count) {
        v.direction = CountDirection::Under;
    } else if (range.max_count && count > *range.max_count) {
        v.direction = CountDirection::Over;
    } else {
        v.direction = CountDirection::Ok;
    }
    v.compliant = v.direction == CountDirection::Ok;
    return v;
}

}  // namespace mfhar
