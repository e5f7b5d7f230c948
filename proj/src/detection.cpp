#include "mfhar/detection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "mfhar/error.hpp"
#include "mfhar/simd/kernels.hpp"
#include "text_util.hpp"

namespace mfhar {

std::string_view to_string(BodyForm form) noexcept {
    switch (form) {
        case BodyForm::Whole:
            return "whole";
        case BodyForm::Upper:
            return "upper";
        case BodyForm::Part:
            return "part";
    }
    return "unknown";
}

std::optional<BodyForm> parse_body_form(std::string_view name) noexcept {
    if (name == "whole") return BodyForm::Whole;
    if (name == "upper") return BodyForm::Upper;
    if (name == "part") return BodyForm::Part;
    return std::nullopt;
}

Detection::Detection(Box box_, BodyForm form_, double confidence_)
    : box(box_), form(form_), confidence(confidence_) {
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
        throw PreconditionError("detection confidence must lie in [0, 1]");
    }
}

namespace {

// Strict ordering used both for NMS visiting order and for final output.
bool ranks_before(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.box.area() != b.box.area()) return a.box.area() > b.box.area();
    if (a.box != b.box) return a.box < b.box;
    return a.form > b.form;
}

}  // namespace

std::vector<Detection> postprocess(std::span<const Candidate> candidates, const DetectorConfig& config) {
    std::vector<Candidate> kept;
    for (BodyForm form : kAllForms) {
        std::vector<Candidate> group;
        for (const auto& c : candidates) {
            if (c.form != form || !std::isfinite(c.score)) continue;
            Candidate clamped = c;
            clamped.score = std::clamp(c.score, 0.0, 1.0);
            if (clamped.score >= config.score_threshold) {
                group.push_back(clamped);
            }
        }
        std::sort(group.begin(), group.end(), ranks_before);

        simd::BoxColumns columns;
        columns.reserve(group.size());
        for (const auto& c : group) {
            columns.push_back(c.box);
        }
        std::vector<char> suppressed(group.size(), 0);
        std::vector<double> overlap(group.size());
        for (std::size_t i = 0; i < group.size(); ++i) {
            if (suppressed[i]) continue;
            kept.push_back(group[i]);
            const auto all = columns.view();
            const std::size_t rest = group.size() - i - 1;
            if (rest == 0) break;
            const simd::BoxColumnsView tail{all.x + i + 1, all.y + i + 1, all.w + i + 1,
                                            all.h + i + 1, rest};
            simd::iou_one_to_many(group[i].box, tail, std::span<double>(overlap.data(), rest));
            for (std::size_t j = 0; j < rest; ++j) {
                if (overlap[j] > config.nms_iou_threshold) {
                    suppressed[i + 1 + j] = 1;
                }
            }
        }
    }
    std::sort(kept.begin(), kept.end(), ranks_before);

    std::vector<Detection> out;
    out.reserve(kept.size());
    for (const auto& c : kept) {
        out.emplace_back(c.box, c.form, c.score);
    }
    return out;
}

ScriptedDetector::ScriptedDetector(std::map<std::int64_t, std::vector<Candidate>> frames,
                                   DetectorConfig config)
    : frames_(std::move(frames)), config_(config) {}

ScriptedDetector ScriptedDetector::parse(std::string_view text, DetectorConfig config) {
    std::map<std::int64_t, std::vector<Candidate>> frames;
    detail::for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        const std::string where = "line " + std::to_string(line_no);
        if (f.size() != 7) {
            throw ParseError(where, "expected 7 fields '<frame> <form> <x> <y> <w> <h> <score>', got " +
                                        std::to_string(f.size()));
        }
        const auto frame = detail::parse_int(f[0], where, "frame index");
        if (frame < 0) {
            throw ParseError(where, "frame index must be non-negative");
        }
        const auto form = parse_body_form(f[1]);
        if (!form) {
            throw ParseError(where, "unknown body form '" + std::string(f[1]) + "'");
        }
        const double x = detail::parse_double(f[2], where, "x");
        const double y = detail::parse_double(f[3], where, "y");
        const double w = detail::parse_double(f[4], where, "w");
        const double h = detail::parse_double(f[5], where, "h");
        const double score = detail::parse_double(f[6], where, "score");
        if (!(score >= 0.0 && score <= 1.0)) {
            throw ParseError(where, "score must lie in [0, 1]");
        }
        try {
            frames[frame].push_back(Candidate{Box(x, y, w, h), *form, score});
        } catch (const InvalidBoxError& e) {
            throw ParseError(where, e.what());
        }
    });
    return ScriptedDetector(std::move(frames), config);
}

ScriptedDetector ScriptedDetector::load(const std::filesystem::path& path, DetectorConfig config) {
    return parse(detail::read_text_file(path), config);
}

std::vector<Detection> ScriptedDetector::detect(const Frame& frame) {
    const auto it = frames_.find(frame.index);
    if (it == frames_.end()) {
        return {};
    }
    if (frame.image.empty()) {
        return postprocess(it->second, config_);
    }
    // Clamp fixture boxes to the frame like a real backend would.
    const LetterboxTransform identity = letterbox_fit(frame.image.extent(), frame.image.extent());
    std::vector<Candidate> clamped;
    clamped.reserve(it->second.size());
    for (const auto& c : it->second) {
        try {
            clamped.push_back(Candidate{map_box_to_source(c.box, identity), c.form, c.score});
        } catch (const InvalidDetectionError&) {
            throw DetectionBackendError("scripted detection outside frame " + frame.stream_id + "#" +
                                        std::to_string(frame.index));
        }
    }
    return postprocess(clamped, config_);
}

}  // namespace mfhar
