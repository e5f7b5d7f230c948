#include "mfhar/routing.hpp"

#include <algorithm>

#include "mfhar/error.hpp"
#include "text_util.hpp"

namespace mfhar {

ActionKind::ActionKind(std::string name) : name_(std::move(name)) {
    if (name_.empty()) {
        throw PreconditionError("action name must be nonempty");
    }
    const bool ok = std::all_of(name_.begin(), name_.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
    if (!ok) {
        throw PreconditionError("action name '" + name_ + "' must be lowercase [a-z0-9_]");
    }
}

std::optional<Handler> Handler::parse(std::string_view text) {
    const auto fields = detail::split_ws(text);
    if (fields.size() == 1 && fields[0] == "counter") {
        return counter();
    }
    if (fields.size() == 2 && fields[0] == "classifier") {
        return classifier_named(std::string(fields[1]));
    }
    return std::nullopt;
}

std::string Handler::to_string() const {
    return kind == Kind::Counter ? std::string("counter") : "classifier " + classifier;
}

Registry::Registry(std::vector<RoutingRule> rules) : rules_(std::move(rules)) {
    std::set<ActionKind> seen;
    for (const auto& rule : rules_) {
        if (!seen.insert(rule.action).second) {
            throw PreconditionError("duplicate action '" + rule.action.str() + "' in registry");
        }
        if (rule.eligible_forms.empty()) {
            throw PreconditionError("action '" + rule.action.str() + "' has no eligible body forms");
        }
        if (rule.handler.kind == Handler::Kind::Classifier && rule.handler.classifier.empty()) {
            throw PreconditionError("action '" + rule.action.str() + "' names an empty classifier");
        }
    }
}

const RoutingRule* Registry::lookup(std::string_view action) const noexcept {
    for (const auto& rule : rules_) {
        if (rule.action.str() == action) {
            return &rule;
        }
    }
    return nullptr;
}

Registry default_registry() {
    using F = BodyForm;
    auto rule = [](const char* action, std::set<BodyForm> forms, Handler handler) {
        return RoutingRule{ActionKind(action), std::move(forms), std::move(handler)};
    };
    return Registry({
        rule("fall", {F::Whole}, Handler::classifier_named("fall")),
        rule("sleep", {F::Upper, F::Whole}, Handler::classifier_named("sleep")),
        rule("on_duty", {F::Part, F::Upper, F::Whole}, Handler::counter()),
        rule("jump", {F::Whole}, Handler::classifier_named("jump")),
        rule("stand", {F::Whole}, Handler::classifier_named("stand")),
        rule("sit", {F::Upper}, Handler::classifier_named("sit")),
    });
}

RoutedIndices route_indices(std::span<const Detection> detections, const Registry& registry) {
    RoutedIndices out;
    for (const auto& rule : registry.rules()) {
        auto& slot = out[rule.action];
        for (std::size_t i = 0; i < detections.size(); ++i) {
            if (rule.eligible_forms.contains(detections[i].form)) {
                slot.push_back(i);
            }
        }
    }
    return out;
}

std::map<ActionKind, std::vector<Detection>> route(std::span<const Detection> detections,
                                                   const Registry& registry) {
    std::map<ActionKind, std::vector<Detection>> out;
    for (const auto& [action, indices] : route_indices(detections, registry)) {
        auto& slot = out[action];
        slot.reserve(indices.size());
        for (std::size_t i : indices) {
            slot.push_back(detections[i]);
        }
    }
    return out;
}

}  // namespace mfhar
