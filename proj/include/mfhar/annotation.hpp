#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfhar/detection.hpp"
#include "mfhar/geometry.hpp"

namespace mfhar {

/// COCO keypoint order.
enum class Joint : std::uint8_t {
    Nose,
    LeftEye,
    RightEye,
    LeftEar,
    RightEar,
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftWrist,
    RightWrist,
    LeftHip,
    RightHip,
    LeftKnee,
    RightKnee,
    LeftAnkle,
    RightAnkle,
};

inline constexpr std::size_t kJointCount = 17;

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    /// 0 unlabeled, 1 labeled but occluded, 2 visible.
    int v = 0;

    bool operator==(const Keypoint&) const = default;
};

struct KeypointPerson {
    std::array<Keypoint, kJointCount> keypoints{};
    Box bbox{0, 0, 1, 1};
    std::int64_t image_id = 0;
    std::int64_t annotation_id = 0;

    Keypoint& at(Joint j) { return keypoints[static_cast<std::size_t>(j)]; }
    const Keypoint& at(Joint j) const { return keypoints[static_cast<std::size_t>(j)]; }
};

/// Visibility predicates that turn keypoints into a body form.
///
/// Whole: enough visible hips, knees, ankles and shoulders (head and hands
/// are ignored). Upper: enough visible head points (nose, eyes, ears) and
/// shoulders. Part: everything else.
struct FormRules {
    /// Minimum visibility flag that counts as "seen".
    int visible_level = 2;
    int whole_min_hips = 1;
    int whole_min_knees = 1;
    int whole_min_ankles = 1;
    int whole_min_shoulders = 1;
    int upper_min_head = 1;
    int upper_min_shoulders = 2;

    bool operator==(const FormRules&) const = default;
};

BodyForm derive_form(const KeypointPerson& person, const FormRules& rules = {});

struct AnnotationRecord {
    std::int64_t image_id = 0;
    Box bbox{0, 0, 1, 1};
    BodyForm form = BodyForm::Part;
    std::int64_t source_annotation_id = 0;

    bool operator==(const AnnotationRecord&) const = default;
};

struct StatsReport {
    std::int64_t whole = 0;
    std::int64_t upper = 0;
    std::int64_t part = 0;
    std::int64_t warnings = 0;

    std::int64_t total() const noexcept { return whole + upper + part; }
    void add(BodyForm form) noexcept;
    StatsReport& operator+=(const StatsReport& other) noexcept;
    std::string to_json() const;

    bool operator==(const StatsReport&) const = default;
};

struct ConversionResult {
    std::vector<AnnotationRecord> records;
    StatsReport stats;
    /// Human-readable notes behind the warnings tally.
    std::vector<std::string> warnings;
};

/// Parses COCO-style keypoint JSON into one record per person annotation,
/// in input order. Throws ParseError naming the JSON path of a bad field.
ConversionResult convert_dataset(std::string_view coco_json, const FormRules& rules = {});

/// One `<image_id> <form> <x> <y> <w> <h> <source_annotation_id>` line per record.
std::string format_records(std::span<const AnnotationRecord> records);
std::vector<AnnotationRecord> parse_records(std::string_view text);

/// Which body form each action subset is cut from.
std::optional<BodyForm> subset_form(std::string_view action_class) noexcept;

struct SubsetMismatch {
    std::int64_t annotation_id = 0;
    std::string action_class;
    std::string reason;
};

struct ActionSubsets {
    /// Action class -> records, in record order.
    std::map<std::string, std::vector<AnnotationRecord>> manifests;
    std::vector<SubsetMismatch> mismatches;
};

/// Groups records by the action class named in `sidecar`
/// (`<annotation_id> <stand|jump|fall|sleep|sit>` per line). Records whose form
/// does not suit the class are reported, not included. Unknown class names are
/// a ParseError.
ActionSubsets emit_action_subsets(std::span<const AnnotationRecord> records, std::string_view sidecar);

/// Writes labels.txt, stats.json and (with a sidecar) subsets/<class>.txt under `out_dir`.
struct ConvertOutputs {
    ConversionResult result;
    std::optional<ActionSubsets> subsets;
};
ConvertOutputs convert_files(const std::filesystem::path& coco_path, const std::filesystem::path& out_dir,
                             const FormRules& rules = {},
                             const std::optional<std::filesystem::path>& sidecar = std::nullopt);

}  // namespace mfhar
