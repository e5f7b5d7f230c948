#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mfhar/detection.hpp"
#include "mfhar/image.hpp"
#include "mfhar/routing.hpp"

namespace mfhar {

/// Ordered class names plus the subset that maps to the action's positive verdict.
class LabelSet {
public:
    /// Throws PreconditionError when names repeat, `positive` is empty or names
    /// something outside `labels`.
    LabelSet(std::vector<std::string> labels, std::set<std::string> positive);

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::set<std::string>& positive() const noexcept { return positive_; }
    std::size_t size() const noexcept { return labels_.size(); }
    std::optional<std::size_t> index_of(std::string_view label) const noexcept;
    bool is_positive(std::size_t index) const { return positive_.contains(labels_.at(index)); }

    bool operator==(const LabelSet&) const = default;

private:
    std::vector<std::string> labels_;
    std::set<std::string> positive_;
};

/// Shipped label set for a known classifier binding (fall, sleep, sit, jump, stand).
std::optional<LabelSet> default_label_set(std::string_view action);

/// Probabilities aligned to a LabelSet; each in [0, 1], summing to 1 within 1e-6.
class ClassDistribution {
public:
    explicit ClassDistribution(std::vector<double> probabilities);

    static ClassDistribution uniform(std::size_t k);
    static ClassDistribution one_hot(std::size_t k, std::size_t index);

    const std::vector<double>& probabilities() const noexcept { return p_; }
    std::size_t size() const noexcept { return p_.size(); }

    bool operator==(const ClassDistribution&) const = default;

private:
    std::vector<double> p_;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

struct Collapsed {
    bool positive = false;
    /// Probability mass on the positive labels.
    double score = 0.0;
    std::string top_label;
};

/// Argmax (earliest label wins exact ties), then map to positive/negative.
///
/// With `positive_mass_threshold` set, positive instead means score >= threshold.
Collapsed collapse(const ClassDistribution& dist, const LabelSet& labels,
                   std::optional<double> positive_mass_threshold = std::nullopt);

struct DetectionVerdict {
    Detection detection;
    /// Position of the detection in the frame's detector output.
    std::size_t detection_index = 0;
    ActionKind action;
    bool positive = false;
    double score = 0.0;
    std::string top_label;
};

/// What a classifier sees: the letterboxed crop plus its provenance.
struct ClassifierInput {
    const Image& canvas;
    std::int64_t frame_index = 0;
    std::size_t detection_index = 0;
};

/// Per-detection action classifier over a fixed LabelSet.
class Classifier {
public:
    Classifier(LabelSet labels, Extent canvas);
    virtual ~Classifier() = default;

    const LabelSet& labels() const noexcept { return labels_; }
    Extent canvas() const noexcept { return canvas_; }

    /// Throws PreconditionError unless the canvas has exactly the expected size.
    ClassDistribution classify(const ClassifierInput& input);

protected:
    virtual ClassDistribution do_classify(const ClassifierInput& input) = 0;

private:
    LabelSet labels_;
    Extent canvas_;
};

/// Replays distributions from a fixture.
///
/// Fixture format: a header `labels: a,b,c`, then lines
/// `<frame_index> <detection_index> <p1> ... <pk>` or `@<crop_hash_hex> <p1> ... <pk>`.
/// Unlisted keys fall back to `fallback` ("uniform" or "onehot:<label>").
class ScriptedClassifier final : public Classifier {
public:
    using Key = std::pair<std::int64_t, std::size_t>;

    ScriptedClassifier(LabelSet labels, std::map<Key, ClassDistribution> by_position,
                       std::map<std::uint64_t, ClassDistribution> by_hash, ClassDistribution fallback,
                       Extent canvas = kClassifierCanvas);

    static ScriptedClassifier parse(std::string_view text, LabelSet labels, std::string_view fallback = "uniform",
                                    Extent canvas = kClassifierCanvas);
    static ScriptedClassifier load(const std::filesystem::path& path, LabelSet labels,
                                   std::string_view fallback = "uniform", Extent canvas = kClassifierCanvas);

protected:
    ClassDistribution do_classify(const ClassifierInput& input) override;

private:
    std::map<Key, ClassDistribution> by_position_;
    std::map<std::uint64_t, ClassDistribution> by_hash_;
    ClassDistribution fallback_;
};

/// Classifier backed by a serialized ONNX network with a single [1, K] head.
///
/// Input is a 1x3xHxW tensor of the canvas in [0, 1]. Outputs that already form
/// a distribution are used as-is; anything else is treated as logits.
class NetworkClassifier final : public Classifier {
public:
    NetworkClassifier(const std::filesystem::path& model_path, LabelSet labels,
                      Extent canvas = kClassifierCanvas);
    ~NetworkClassifier() override;

    /// Converts raw head output into a distribution over `k` classes.
    /// Throws ShapeMismatchError when the element count differs from k.
    static ClassDistribution interpret_head(std::span<const float> head, std::size_t k);

protected:
    ClassDistribution do_classify(const ClassifierInput& input) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mfhar
