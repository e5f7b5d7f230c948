#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfhar/geometry.hpp"
#include "mfhar/image.hpp"

namespace mfhar {

/// Body form of a detected person. Ordered by completeness: Part < Upper < Whole.
enum class BodyForm : std::uint8_t { Part = 0, Upper = 1, Whole = 2 };

inline constexpr BodyForm kAllForms[] = {BodyForm::Whole, BodyForm::Upper, BodyForm::Part};

std::string_view to_string(BodyForm form) noexcept;
std::optional<BodyForm> parse_body_form(std::string_view name) noexcept;

/// A scored, form-labeled box in source-frame pixels.
struct Detection {
    Box box;
    BodyForm form;
    double confidence;

    Detection(Box box, BodyForm form, double confidence);

    bool operator==(const Detection&) const = default;
};

/// Raw detector output before score filtering and NMS.
struct Candidate {
    Box box;
    BodyForm form;
    double score;
};

struct DetectorConfig {
    int input_size = 640;
    double score_threshold = 0.25;
    double nms_iou_threshold = 0.45;
    /// Gray level used for letterbox padding.
    int letterbox_fill = 114;

    bool operator==(const DetectorConfig&) const = default;
};

/// Score filter plus greedy per-form NMS; output sorted by descending confidence.
///
/// Scores are clamped to [0, 1]. Equal scores are ordered by larger area, then
/// by lexicographic box coordinates.
std::vector<Detection> postprocess(std::span<const Candidate> candidates, const DetectorConfig& config);

/// Multi-form person detector. One instance serves one stream context at a time.
class Detector {
public:
    virtual ~Detector() = default;

    /// Detections for `frame`, already score-filtered and NMS-suppressed.
    /// Throws DetectionBackendError naming the frame on backend failure.
    virtual std::vector<Detection> detect(const Frame& frame) = 0;
};

/// Replays detections listed in a fixture file, keyed by frame index.
///
/// Fixture lines: `<frame_index> <whole|upper|part> <x> <y> <w> <h> <score>`,
/// `#` starts a comment.
class ScriptedDetector final : public Detector {
public:
    ScriptedDetector(std::map<std::int64_t, std::vector<Candidate>> frames, DetectorConfig config);

    static ScriptedDetector parse(std::string_view text, DetectorConfig config);
    static ScriptedDetector load(const std::filesystem::path& path, DetectorConfig config);

    std::vector<Detection> detect(const Frame& frame) override;

    std::size_t frame_count() const noexcept { return frames_.size(); }

private:
    std::map<std::int64_t, std::vector<Candidate>> frames_;
    DetectorConfig config_;
};

/// Detector backed by a serialized ONNX network; see docs/model-contract.md.
///
/// Expected output: [1, N, 8] (or [N, 8]) rows of
/// (cx, cy, w, h, objectness, p_whole, p_upper, p_part) in input pixels.
class NetworkDetector final : public Detector {
public:
    NetworkDetector(const std::filesystem::path& model_path, DetectorConfig config);
    ~NetworkDetector() override;
    NetworkDetector(NetworkDetector&&) noexcept;
    NetworkDetector& operator=(NetworkDetector&&) noexcept;

    std::vector<Detection> detect(const Frame& frame) override;

    /// Turns one raw output tensor into candidates in canvas coordinates.
    /// Throws ShapeMismatchError when the layout is not [.., N, 8].
    static std::vector<Candidate> decode(std::span<const int> shape, std::span<const float> data);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mfhar
