#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfhar/annotation.hpp"
#include "mfhar/classification.hpp"
#include "mfhar/detection.hpp"
#include "mfhar/evaluation.hpp"
#include "mfhar/onduty.hpp"
#include "mfhar/routing.hpp"
#include "mfhar/temporal.hpp"

namespace mfhar {

struct SourceConfig {
    enum class Kind { Synthetic, Directory, Raw };

    Kind kind = Kind::Synthetic;
    /// Synthetic frames: size, count and gray level.
    int width = 640;
    int height = 480;
    std::int64_t frames = 0;
    int gray = 0;
    /// Frame rate used to derive timestamps.
    double fps = 25.0;
    /// Directory (with manifest.txt) or raw-protocol file; "-" is stdin.
    std::string path;

    bool operator==(const SourceConfig&) const = default;
};

struct StreamConfig {
    std::string id;
    SourceConfig source;

    bool operator==(const StreamConfig&) const = default;
};

struct DetectorBackendConfig {
    std::string backend = "scripted";
    std::string fixture;
    std::string model;
    DetectorConfig params;

    bool operator==(const DetectorBackendConfig&) const = default;
};

struct ClassifierConfig {
    std::string backend = "scripted";
    std::string fixture;
    std::string model;
    std::vector<std::string> labels;
    std::vector<std::string> positive;
    /// Scripted fallback for unlisted keys: "uniform" or "onehot:<label>".
    std::string fallback = "uniform";
    std::optional<double> positive_mass_threshold;

    LabelSet label_set() const;

    bool operator==(const ClassifierConfig&) const = default;
};

struct CropConfig {
    int width = 128;
    int height = 384;
    int fill = 114;

    Extent extent() const noexcept { return Extent{double(width), double(height)}; }

    bool operator==(const CropConfig&) const = default;
};

struct OnDutyConfig {
    ComplianceRange range;
    double containment_threshold = 0.7;

    bool operator==(const OnDutyConfig&) const = default;
};

struct SinkConfig {
    std::string kind = "log";
    std::string path;
    std::string url;
    /// Actions delivered to this sink; empty means all.
    std::vector<std::string> actions;
    int queue_capacity = 64;
    int max_retries = 3;
    int backoff_ms = 50;

    bool operator==(const SinkConfig&) const = default;
};

struct EvaluationConfig {
    double iou_threshold = 0.5;
    ScoringProtocol protocol = ScoringProtocol::Frame;

    bool operator==(const EvaluationConfig&) const = default;
};

/// Classifier blocks bound by the default registry.
std::map<std::string, ClassifierConfig> default_classifiers();

struct PipelineConfig {
    std::vector<StreamConfig> streams;
    DetectorBackendConfig detector;
    Registry registry = default_registry();
    std::map<std::string, ClassifierConfig> classifiers = default_classifiers();
    CropConfig crop;
    SamplerConfig sampler;
    OnDutyConfig on_duty;
    FormRules annotation;
    std::vector<SinkConfig> sinks;
    EvaluationConfig evaluation;

    bool operator==(const PipelineConfig&) const = default;
};

/// A fully defaulted, cross-checked configuration.
struct ValidatedConfig {
    PipelineConfig config;
    /// Directory against which relative paths in the config resolve.
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const std::string& path) const;
};

/// Parses and checks JSON config text. Empty text yields all defaults.
/// Throws ConfigError listing every problem with its JSON path.
ValidatedConfig validate(std::string_view text, std::filesystem::path base_dir = {});

ValidatedConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (sorted keys, every field explicit). validate() of the
/// output reproduces the same config.
std::string print_effective(const PipelineConfig& config);

/// One documented configuration field.
struct SchemaField {
    std::string_view path;
    std::string_view type;
    std::string_view default_value;
    std::string_view description;
};

/// Every accepted field; drives unknown-key checks and the schema text.
const std::vector<SchemaField>& config_schema();

/// Human-readable schema (embedded in the CLI help).
std::string render_schema();

/// Where each numeric default comes from. "reference" marks values taken
/// from the published reference system; "decision" marks deployment choices.
const std::map<std::string, std::string>& default_provenance();

}  // namespace mfhar
