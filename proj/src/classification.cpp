#include "mfhar/classification.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mfhar/error.hpp"
#include "text_util.hpp"

namespace mfhar {

namespace {
constexpr double kSumTolerance = 1e-6;
}

LabelSet::LabelSet(std::vector<std::string> labels, std::set<std::string> positive)
    : labels_(std::move(labels)), positive_(std::move(positive)) {
    if (labels_.empty()) {
        throw PreconditionError("label set must not be empty");
    }
    std::set<std::string> unique(labels_.begin(), labels_.end());
    if (unique.size() != labels_.size()) {
        throw PreconditionError("label names must be unique");
    }
    if (positive_.empty()) {
        throw PreconditionError("label set needs at least one positive label");
    }
    for (const auto& p : positive_) {
        if (!unique.contains(p)) {
            throw PreconditionError("positive label '" + p + "' is not in the label set");
        }
    }
}

std::optional<std::size_t> LabelSet::index_of(std::string_view label) const noexcept {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

std::optional<LabelSet> default_label_set(std::string_view action) {
    if (action == "sleep") return LabelSet({"sleep", "sit", "nosleep"}, {"sleep"});
    if (action == "sit") return LabelSet({"sleep", "sit", "nosleep"}, {"sit"});
    if (action == "fall") return LabelSet({"fall", "sit_on_furniture", "other"}, {"fall"});
    if (action == "jump") return LabelSet({"jump", "other"}, {"jump"});
    if (action == "stand") return LabelSet({"stand", "other"}, {"stand"});
    return std::nullopt;
}

ClassDistribution::ClassDistribution(std::vector<double> probabilities) : p_(std::move(probabilities)) {
    if (p_.empty()) {
        throw PreconditionError("distribution must not be empty");
    }
    double sum = 0.0;
    for (double v : p_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw PreconditionError("probabilities must lie in [0, 1]");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        std::ostringstream msg;
        msg << "probabilities sum to " << sum << ", expected 1";
        throw PreconditionError(msg.str());
    }
}

ClassDistribution ClassDistribution::uniform(std::size_t k) {
    return ClassDistribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

ClassDistribution ClassDistribution::one_hot(std::size_t k, std::size_t index) {
    std::vector<double> p(k, 0.0);
    p.at(index) = 1.0;
    return ClassDistribution(std::move(p));
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) return {};
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

Collapsed collapse(const ClassDistribution& dist, const LabelSet& labels,
                   std::optional<double> positive_mass_threshold) {
    if (dist.size() != labels.size()) {
        throw PreconditionError("distribution has " + std::to_string(dist.size()) +
                                " entries for a label set of " + std::to_string(labels.size()));
    }
    const auto& p = dist.probabilities();
    // max_element returns the first maximum, i.e. the earliest label on ties.
    const auto top = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    Collapsed out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (labels.is_positive(i)) out.score += p[i];
    }
    out.score = std::clamp(out.score, 0.0, 1.0);
    out.top_label = labels.labels()[top];
    out.positive = positive_mass_threshold ? out.score >= *positive_mass_threshold : labels.is_positive(top);
    return out;
}

Classifier::Classifier(LabelSet labels, Extent canvas) : labels_(std::move(labels)), canvas_(canvas) {}

ClassDistribution Classifier::classify(const ClassifierInput& input) {
    if (input.canvas.width() != static_cast<int>(canvas_.w) ||
        input.canvas.height() != static_cast<int>(canvas_.h)) {
        throw PreconditionError("classifier canvas must be " + std::to_string(int(canvas_.w)) + "x" +
                                std::to_string(int(canvas_.h)) + ", got " +
                                std::to_string(input.canvas.width()) + "x" +
                                std::to_string(input.canvas.height()));
    }
    auto dist = do_classify(input);
    if (dist.size() != labels_.size()) {
        throw ClassifierBackendError("classifier returned " + std::to_string(dist.size()) +
                                     " classes, expected " + std::to_string(labels_.size()));
    }
    return dist;
}

ScriptedClassifier::ScriptedClassifier(LabelSet labels, std::map<Key, ClassDistribution> by_position,
                                       std::map<std::uint64_t, ClassDistribution> by_hash,
                                       ClassDistribution fallback, Extent canvas)
    : Classifier(std::move(labels), canvas),
      by_position_(std::move(by_position)),
      by_hash_(std::move(by_hash)),
      fallback_(std::move(fallback)) {}

namespace {

ClassDistribution make_fallback(std::string_view spec, const LabelSet& labels) {
    if (spec == "uniform") {
        return ClassDistribution::uniform(labels.size());
    }
    constexpr std::string_view prefix = "onehot:";
    if (spec.starts_with(prefix)) {
        if (const auto idx = labels.index_of(spec.substr(prefix.size()))) {
            return ClassDistribution::one_hot(labels.size(), *idx);
        }
    }
    throw PreconditionError("unknown classifier default '" + std::string(spec) +
                            "' (expected 'uniform' or 'onehot:<label>')");
}

}  // namespace

ScriptedClassifier ScriptedClassifier::parse(std::string_view text, LabelSet labels, std::string_view fallback,
                                             Extent canvas) {
    std::optional<std::vector<std::size_t>> column_to_label;
    std::map<Key, ClassDistribution> by_position;
    std::map<std::uint64_t, ClassDistribution> by_hash;

    detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const std::string where = "line " + std::to_string(line_no);
        if (line.starts_with("labels:")) {
            if (column_to_label) throw ParseError(where, "duplicate labels header");
            std::vector<std::size_t> mapping;
            std::set<std::size_t> seen;
            std::string_view rest = line.substr(7);
            while (true) {
                const auto comma = rest.find(',');
                const auto name = detail::trim(rest.substr(0, comma));
                const auto idx = labels.index_of(name);
                if (!idx) throw ParseError(where, "label '" + std::string(name) + "' is not configured");
                if (!seen.insert(*idx).second) throw ParseError(where, "label '" + std::string(name) + "' repeated");
                mapping.push_back(*idx);
                if (comma == std::string_view::npos) break;
                rest = rest.substr(comma + 1);
            }
            if (mapping.size() != labels.size()) {
                throw ParseError(where, "labels header lists " + std::to_string(mapping.size()) +
                                            " classes, classifier has " + std::to_string(labels.size()));
            }
            column_to_label = std::move(mapping);
            return;
        }
        if (!column_to_label) throw ParseError(where, "missing 'labels:' header before data");

        const auto fields = detail::split_ws(line);
        const bool hashed = !fields.empty() && fields[0].starts_with("@");
        const std::size_t key_fields = hashed ? 1 : 2;
        if (fields.size() != key_fields + labels.size()) {
            throw ParseError(where, "expected " + std::to_string(key_fields + labels.size()) + " fields, got " +
                                        std::to_string(fields.size()));
        }
        std::vector<double> p(labels.size(), 0.0);
        for (std::size_t c = 0; c < labels.size(); ++c) {
            p[(*column_to_label)[c]] = detail::parse_double(fields[key_fields + c], where, "probability");
        }
        std::optional<ClassDistribution> dist;
        try {
            dist.emplace(std::move(p));
        } catch (const PreconditionError& e) {
            throw ParseError(where, e.what());
        }
        if (hashed) {
            const auto hex = fields[0].substr(1);
            std::uint64_t h = 0;
            const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), h, 16);
            if (ec != std::errc() || ptr != hex.data() + hex.size()) {
                throw ParseError(where, "invalid crop hash '" + std::string(fields[0]) + "'");
            }
            by_hash.insert_or_assign(h, std::move(*dist));
        } else {
            const auto frame = detail::parse_int(fields[0], where, "frame index");
            const auto det = detail::parse_int(fields[1], where, "detection index");
            if (frame < 0 || det < 0) throw ParseError(where, "indices must be non-negative");
            by_position.insert_or_assign(Key{frame, static_cast<std::size_t>(det)}, std::move(*dist));
        }
    });
    auto fb = make_fallback(fallback, labels);
    return ScriptedClassifier(std::move(labels), std::move(by_position), std::move(by_hash), std::move(fb),
                              canvas);
}

ScriptedClassifier ScriptedClassifier::load(const std::filesystem::path& path, LabelSet labels,
                                            std::string_view fallback, Extent canvas) {
    return parse(detail::read_text_file(path), std::move(labels), fallback, canvas);
}

ClassDistribution ScriptedClassifier::do_classify(const ClassifierInput& input) {
    if (!by_hash_.empty()) {
        if (const auto it = by_hash_.find(input.canvas.content_hash()); it != by_hash_.end()) {
            return it->second;
        }
    }
    if (const auto it = by_position_.find(Key{input.frame_index, input.detection_index});
        it != by_position_.end()) {
        return it->second;
    }
    return fallback_;
}

ClassDistribution NetworkClassifier::interpret_head(std::span<const float> head, std::size_t k) {
    if (head.size() != k) {
        throw ShapeMismatchError("classifier head has " + std::to_string(head.size()) +
                                 " outputs but the label set has " + std::to_string(k) + " classes");
    }
    std::vector<double> values(head.begin(), head.end());
    const bool in_range = std::all_of(values.begin(), values.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
    const double sum = std::accumulate(values.begin(), values.end(), 0.0);
    if (in_range && std::abs(sum - 1.0) <= 1e-3) {
        for (double& v : values) v /= sum;
        return ClassDistribution(std::move(values));
    }
    return ClassDistribution(softmax(values));
}

}  // namespace mfhar
